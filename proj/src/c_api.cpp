#include "searn/c_api.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "searn/error.hpp"
#include "searn/eval.hpp"
#include "searn/experiment.hpp"
#include "searn/searn.hpp"
#include "searn/task_depparse.hpp"

struct searn_config {
  searn::Config values;
};

struct searn_parser_state {
  searn::ParserState state;
};

namespace {

thread_local std::string g_last_error;

searn_status status_of(searn::ErrorKind kind) {
  using searn::ErrorKind;
  switch (kind) {
    case ErrorKind::data:
    case ErrorKind::training: return SEARN_ERR_DATA;
    case ErrorKind::config: return SEARN_ERR_CONFIG;
    case ErrorKind::state: return SEARN_ERR_STATE;
    case ErrorKind::parameter: return SEARN_ERR_PARAM;
    case ErrorKind::io: return SEARN_ERR_IO;
    default: return SEARN_ERR_INTERNAL;
  }
}

template <class F>
searn_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SEARN_OK;
  } catch (const searn::Error& e) {
    g_last_error = std::string(searn::error_kind_name(e.kind())) + ": " + e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SEARN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return SEARN_ERR_INTERNAL;
  }
}

searn_status null_arg(const char* name) {
  g_last_error = std::string("parameter error: ") + name + " is null";
  return SEARN_ERR_PARAM;
}

char* copy_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

searn_status run_command(const searn_config* cfg, char** summary,
                         searn::CommandResult (*cmd)(const searn::Config&)) {
  if (!cfg) return null_arg("config");
  if (summary) *summary = nullptr;
  bool ok = true;
  auto st = guarded([&] {
    auto res = cmd(cfg->values);
    ok = res.ok;
    if (summary) *summary = copy_string(res.summary);
  });
  if (st == SEARN_OK && !ok) {
    g_last_error = "data error: the check did not pass";
    return SEARN_ERR_DATA;
  }
  return st;
}

}  // namespace

extern "C" {

const char* searn_last_error(void) { return g_last_error.c_str(); }

const char* searn_status_name(searn_status status) {
  switch (status) {
    case SEARN_OK: return "ok";
    case SEARN_ERR_DATA: return "data error";
    case SEARN_ERR_CONFIG: return "config error";
    case SEARN_ERR_STATE: return "state error";
    case SEARN_ERR_PARAM: return "parameter error";
    case SEARN_ERR_IO: return "i/o error";
    case SEARN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

searn_status searn_config_create(searn_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new searn_config(); });
}

void searn_config_destroy(searn_config* cfg) { delete cfg; }

searn_status searn_config_set(searn_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("config");
  if (!key) return null_arg("key");
  return guarded([&] {
    searn::Config one{{key, value ? value : ""}};
    searn::check_known_keys(one);
    cfg->values[key] = value ? value : "";
  });
}

searn_status searn_config_load_file(searn_config* cfg, const char* path) {
  if (!cfg) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] {
    for (auto& [k, v] : searn::load_config(path)) cfg->values.emplace(k, v);
  });
}

searn_status searn_cmd_gen(const searn_config* cfg, char** summary) {
  return run_command(cfg, summary, &searn::cmd_gen);
}
searn_status searn_cmd_train(const searn_config* cfg, char** summary) {
  return run_command(cfg, summary, &searn::cmd_train);
}
searn_status searn_cmd_eval(const searn_config* cfg, char** summary) {
  return run_command(cfg, summary, &searn::cmd_eval);
}
searn_status searn_cmd_learning_curve(const searn_config* cfg, char** summary) {
  return run_command(cfg, summary, &searn::cmd_learning_curve);
}
searn_status searn_cmd_equivalence(const searn_config* cfg, char** summary) {
  return run_command(cfg, summary, &searn::cmd_equivalence);
}

void searn_string_free(char* s) { std::free(s); }

searn_status searn_bound(double loss_initial, double loss_avg, size_t T, double c, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = searn::searn_bound(loss_initial, loss_avg, T, c); });
}

searn_status searn_matched_hamming(const int* pred, const int* gold, size_t n, size_t k_pred,
                                   size_t k_gold, double* out) {
  if (!out) return null_arg("out");
  if (n && (!pred || !gold)) return null_arg("labels");
  return guarded([&] {
    *out = searn::matched_hamming({pred, n}, {gold, n}, k_pred, k_gold);
  });
}

searn_status searn_arc_accuracy(const int* pred_heads, const int* gold_heads, size_t T, double* out) {
  if (!out) return null_arg("out");
  if (T && (!pred_heads || !gold_heads)) return null_arg("heads");
  return guarded([&] {
    searn::DependencyTree p{{pred_heads, pred_heads + T}};
    searn::DependencyTree g{{gold_heads, gold_heads + T}};
    *out = searn::arc_accuracy(p, g);
  });
}

searn_status searn_parser_create(size_t T, searn_parser_state** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new searn_parser_state{searn::ParserState::initial(T)}; });
}

void searn_parser_destroy(searn_parser_state* s) { delete s; }

int searn_parser_is_legal(const searn_parser_state* s, int action) {
  return s && searn::is_legal(s->state, action) ? 1 : 0;
}

searn_status searn_parser_apply(searn_parser_state* s, int action) {
  if (!s) return null_arg("state");
  return guarded([&] { s->state = searn::apply_action(s->state, action); });
}

int searn_parser_is_final(const searn_parser_state* s) { return s && s->state.is_final() ? 1 : 0; }

searn_status searn_parser_finalize(const searn_parser_state* s, int* heads, size_t T) {
  if (!s) return null_arg("state");
  if (T && !heads) return null_arg("heads");
  return guarded([&] {
    searn::require(T == s->state.length(), searn::ErrorKind::parameter,
                   "head buffer length differs from the sentence length");
    auto tree = searn::finalize(s->state);
    for (size_t d = 0; d < T; ++d) heads[d] = tree.heads[d];
  });
}

}  // extern "C"
