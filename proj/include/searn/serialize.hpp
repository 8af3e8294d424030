#pragma once

#include <map>
#include <string>

#include "searn/em.hpp"
#include "searn/features.hpp"
#include "searn/policy.hpp"

namespace searn {

// A learned policy with everything needed to run it again: the feature
// names its classifiers were trained against and the task settings.
struct SavedPolicy {
  Policy policy;
  FeatureInterner interner;
  std::map<std::string, std::string> task;
};

std::string policy_to_json(const Policy& policy, const FeatureInterner& interner,
                           const std::map<std::string, std::string>& task);
SavedPolicy policy_from_json(const std::string& text);

std::string hmm_to_json(const HmmParams& params, const std::map<std::string, std::string>& meta = {});
HmmParams hmm_from_json(const std::string& text);

std::string mixture_to_json(const MultinomialMixtureParams& params,
                            const std::map<std::string, std::string>& meta = {});
MultinomialMixtureParams mixture_from_json(const std::string& text);

// The "format" field of a model file ("policy", "hmm" or "mixture").
std::string model_format(const std::string& text);
// The "meta"/"task" string map of a model file.
std::map<std::string, std::string> model_meta(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace searn
