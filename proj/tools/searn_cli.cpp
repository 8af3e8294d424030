#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "searn/c_api.h"

namespace {

struct Flag {
  const char* key;
  const char* help;
  bool boolean = false;
};

const std::vector<Flag> kFlags = {
    {"task", "cluster | sequence | depparse"},
    {"method", "em | searn-nb | searn-lr"},
    {"supervision", "unsup | sup | semi"},
    {"data", "input corpus (comma-separated for eval)"},
    {"dev", "development corpus for early stopping"},
    {"test", "held-out corpus"},
    {"gold", "gold labelings (comma-separated for eval)"},
    {"model", "model file(s) (comma-separated for eval)"},
    {"out", "output directory"},
    {"seed", "master seed"},
    {"seeds", "comma-separated seeds"},
    {"runs", "number of generated datasets"},
    {"order", "HMM order (1 or 2)"},
    {"k", "number of latent labels or clusters"},
    {"v", "vocabulary size"},
    {"sequences", "sequences per dataset"},
    {"mean-length", "mean sequence length"},
    {"docs", "documents per corpus"},
    {"doc-length", "mean document length"},
    {"sentences", "treebank size"},
    {"tagset", "number of tags"},
    {"max-length", "maximum sentence length"},
    {"stop-probability", "dependent stop probability"},
    {"beta", "interpolation rate"},
    {"n-samples", "rollouts per candidate action"},
    {"iterations", "training iterations"},
    {"em-iterations", "maximum EM passes"},
    {"patience", "dev iterations without improvement before stopping"},
    {"threads", "rollout worker threads"},
    {"exact", "exact expected costs (cluster task)", true},
    {"tie-randomness", "share rollout randomness across actions", true},
    {"action-mode", "argmin | sample"},
    {"weight-mode", "softmin | argmin_spread"},
    {"smoothing", "naive Bayes / estimator smoothing"},
    {"lr-variance", "logistic regression prior variance"},
    {"tree-variance", "prior variance of the tree classifier"},
    {"word-variance", "prior variance of the word classifier"},
    {"features", "nb_hmm | lr_window"},
    {"wide-emit", "emit features include neighbouring labels", true},
    {"decode", "viterbi | posterior"},
    {"labeled", "number of labeled sentences"},
    {"labeled-counts", "comma-separated labeled counts"},
    {"tolerance", "numerical tolerance"},
};

using Command = searn_status (*)(const searn_config*, char**);

int exit_code(searn_status st) {
  switch (st) {
    case SEARN_OK: return 0;
    case SEARN_ERR_DATA:
    case SEARN_ERR_STATE:
    case SEARN_ERR_IO: return 1;
    case SEARN_ERR_CONFIG:
    case SEARN_ERR_PARAM: return 2;
    default: return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SEARN structured prediction experiments"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    Command cmd;
  };
  const std::vector<Entry> commands = {
      {"gen", "generate synthetic corpora", &searn_cmd_gen},
      {"train", "train a model and write its log", &searn_cmd_train},
      {"eval", "score trained models against gold data", &searn_cmd_eval},
      {"learning-curve", "parser accuracy against the number of labeled sentences", &searn_cmd_learning_curve},
      {"equivalence", "compare EM with exact-mode SEARN on random corpora", &searn_cmd_equivalence},
  };
  std::map<std::string, std::string> values;
  std::string config_path;
  std::map<CLI::App*, Command> dispatch;

  for (const auto& [name, help, cmd] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value file; flags take precedence");
    for (const auto& f : kFlags) {
      auto* opt = sub->add_option_function<std::string>(
          std::string("--") + f.key, [&values, key = std::string(f.key)](const std::string& v) { values[key] = v; },
          f.help);
      if (f.boolean) opt->expected(0, 1);
    }
    dispatch[sub] = cmd;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  // Bare boolean flags arrive with no value.
  for (const auto& f : kFlags) {
    if (!f.boolean) continue;
    for (auto& [sub, cmd] : dispatch) {
      auto* opt = sub->get_option(std::string("--") + f.key);
      if (sub->parsed() && opt->count() > 0 && opt->results().empty()) values[f.key] = "true";
    }
  }

  searn_config* cfg = nullptr;
  if (searn_config_create(&cfg) != SEARN_OK) {
    std::fprintf(stderr, "%s\n", searn_last_error());
    return 3;
  }
  searn_status st = SEARN_OK;
  for (const auto& [k, v] : values) {
    st = searn_config_set(cfg, k.c_str(), v.c_str());
    if (st != SEARN_OK) break;
  }
  if (st == SEARN_OK && !config_path.empty()) st = searn_config_load_file(cfg, config_path.c_str());

  if (st == SEARN_OK) {
    for (auto& [sub, cmd] : dispatch) {
      if (!sub->parsed()) continue;
      char* summary = nullptr;
      st = cmd(cfg, &summary);
      if (summary) {
        std::fputs(summary, stdout);
        searn_string_free(summary);
      }
    }
  }
  if (st != SEARN_OK) std::fprintf(stderr, "searn: %s\n", searn_last_error());
  searn_config_destroy(cfg);
  return exit_code(st);
}
