#ifndef SEARN_C_API_H
#define SEARN_C_API_H

#include <stddef.h>

#if defined(SEARN_BUILDING_LIBRARY)
#define SEARN_API __attribute__((visibility("default")))
#else
#define SEARN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The first three double as CLI exit codes. */
typedef enum searn_status {
  SEARN_OK = 0,
  SEARN_ERR_DATA = 1,
  SEARN_ERR_CONFIG = 2,
  SEARN_ERR_STATE = 3,
  SEARN_ERR_PARAM = 4,
  SEARN_ERR_IO = 5,
  SEARN_ERR_INTERNAL = 6
} searn_status;

typedef struct searn_config searn_config;
typedef struct searn_parser_state searn_parser_state;

/* Message of the last failed call on this thread; "" after a success. */
SEARN_API const char* searn_last_error(void);
SEARN_API const char* searn_status_name(searn_status status);

/* Experiment configuration: a flat key/value map. */
SEARN_API searn_status searn_config_create(searn_config** out);
SEARN_API void searn_config_destroy(searn_config* cfg);
SEARN_API searn_status searn_config_set(searn_config* cfg, const char* key, const char* value);
/* Merges a `key = value` file; keys already set are kept. */
SEARN_API searn_status searn_config_load_file(searn_config* cfg, const char* path);

/* Commands. `summary` (may be NULL) receives a NUL-terminated report that
   the caller releases with searn_string_free. */
SEARN_API searn_status searn_cmd_gen(const searn_config* cfg, char** summary);
SEARN_API searn_status searn_cmd_train(const searn_config* cfg, char** summary);
SEARN_API searn_status searn_cmd_eval(const searn_config* cfg, char** summary);
SEARN_API searn_status searn_cmd_learning_curve(const searn_config* cfg, char** summary);
/* Returns SEARN_ERR_DATA when any corpus fails to match. */
SEARN_API searn_status searn_cmd_equivalence(const searn_config* cfg, char** summary);
SEARN_API void searn_string_free(char* s);

/* Metrics and bounds. */
SEARN_API searn_status searn_bound(double loss_initial, double loss_avg, size_t T, double c,
                                   double* out);
SEARN_API searn_status searn_matched_hamming(const int* pred, const int* gold, size_t n,
                                             size_t k_pred, size_t k_gold, double* out);
/* heads[d] for d = 1..T, stored at index d - 1; 0 is the root. */
SEARN_API searn_status searn_arc_accuracy(const int* pred_heads, const int* gold_heads, size_t T,
                                          double* out);

/* Arc-eager parser state. Actions: 0 LeftArc, 1 RightArc, 2 Reduce, 3 Shift. */
SEARN_API searn_status searn_parser_create(size_t T, searn_parser_state** out);
SEARN_API void searn_parser_destroy(searn_parser_state* s);
SEARN_API int searn_parser_is_legal(const searn_parser_state* s, int action);
SEARN_API searn_status searn_parser_apply(searn_parser_state* s, int action);
SEARN_API int searn_parser_is_final(const searn_parser_state* s);
/* Writes T heads (index d - 1 for token d) after attaching headless tokens to the root. */
SEARN_API searn_status searn_parser_finalize(const searn_parser_state* s, int* heads, size_t T);

#ifdef __cplusplus
}
#endif

#endif
