#include "searn/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "searn/error.hpp"

namespace searn {

namespace {

using nlohmann::ordered_json;
constexpr int kVersion = 1;

// JSON has no infinities; they appear in unsmoothed naive Bayes tables.
ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::data, "expected a number in model file");
}

ordered_json vec_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> vec_from(const ordered_json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number(x));
  return v;
}

ordered_json table_json(const Table& t) {
  return {{"rows", t.rows}, {"cols", t.cols}, {"data", vec_json(t.data)}};
}

Table table_from(const ordered_json& j) {
  Table t;
  t.rows = j.at("rows").get<std::size_t>();
  t.cols = j.at("cols").get<std::size_t>();
  t.data = vec_from(j.at("data"));
  require(t.data.size() == t.rows * t.cols, ErrorKind::data, "table size mismatch in model file");
  return t;
}

ordered_json slot_json(const SlotModel& m) {
  ordered_json j;
  if (const auto* nb = std::get_if<NBModel>(&m)) {
    j["type"] = "naive_bayes";
    j["smoothing"] = nb->smoothing;
    j["class_log_prior"] = vec_json(nb->class_log_prior);
    j["feature_log_prob"] = table_json(nb->feature_log_prob);
  } else if (const auto* lr = std::get_if<LRModel>(&m)) {
    j["type"] = "logistic";
    j["l2_variance"] = lr->l2_variance;
    j["trained_epochs"] = lr->trained_epochs;
    j["weights"] = table_json(lr->weights);
  } else if (const auto* est = std::get_if<MultinomialEstimator>(&m)) {
    j["type"] = "multinomial";
    j["smoothing"] = est->smoothing;
    j["probs"] = table_json(est->probs);
  } else {
    j["type"] = "none";
  }
  return j;
}

SlotModel slot_from(const ordered_json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "naive_bayes") {
    NBModel nb;
    nb.smoothing = number(j.at("smoothing"));
    nb.class_log_prior = vec_from(j.at("class_log_prior"));
    nb.feature_log_prob = table_from(j.at("feature_log_prob"));
    return nb;
  }
  if (type == "logistic") {
    LRModel lr;
    lr.l2_variance = number(j.at("l2_variance"));
    lr.trained_epochs = j.at("trained_epochs").get<int>();
    lr.weights = table_from(j.at("weights"));
    return lr;
  }
  if (type == "multinomial") {
    MultinomialEstimator est;
    est.smoothing = number(j.at("smoothing"));
    est.probs = table_from(j.at("probs"));
    return est;
  }
  require(type == "none", ErrorKind::data, "unknown classifier type '" + type + "'");
  return std::monostate{};
}

ordered_json parse(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::data, std::string("malformed model file: ") + e.what());
  }
}

void check_format(const ordered_json& j, const std::string& format) {
  require(j.is_object() && j.value("format", "") == format, ErrorKind::data,
          "model file is not a " + format + " model");
  require(j.value("version", 0) == kVersion, ErrorKind::data, "unsupported model file version");
}

template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace

std::string policy_to_json(const Policy& policy, const FeatureInterner& interner,
                           const std::map<std::string, std::string>& task) {
  policy.validate();
  ordered_json j;
  j["format"] = "policy";
  j["version"] = kVersion;
  j["task"] = task;
  j["action_mode"] = policy.action_mode() == ActionMode::sample ? "sample" : "argmin";
  j["features"] = interner.names();
  j["components"] = ordered_json::array();
  for (const auto& c : policy.components()) {
    ordered_json cj;
    cj["weight"] = c.weight;
    cj["initial"] = c.initial;
    if (c.rule) {
      cj["iteration"] = c.rule->iteration;
      cj["slots"] = ordered_json::array();
      for (const auto& s : c.rule->slots) cj["slots"].push_back(slot_json(s));
    }
    j["components"].push_back(std::move(cj));
  }
  return j.dump(1) + "\n";
}

SavedPolicy policy_from_json(const std::string& text) {
  auto j = parse(text);
  check_format(j, "policy");
  return guarded([&] {
    SavedPolicy out;
    out.task = j.at("task").get<std::map<std::string, std::string>>();
    for (const auto& name : j.at("features")) out.interner.intern(name.get<std::string>());
    require(out.interner.size() == j.at("features").size(), ErrorKind::data,
            "duplicate feature names in model file");
    std::vector<PolicyComponent> comps;
    for (const auto& cj : j.at("components")) {
      PolicyComponent c;
      c.weight = cj.at("weight").get<double>();
      c.initial = cj.at("initial").get<bool>();
      if (cj.contains("slots")) {
        auto rule = std::make_shared<LearnedRule>();
        rule->iteration = cj.at("iteration").get<std::size_t>();
        for (const auto& s : cj.at("slots")) rule->slots.push_back(slot_from(s));
        c.rule = std::move(rule);
      }
      comps.push_back(std::move(c));
    }
    const auto mode = j.at("action_mode").get<std::string>();
    try {
      out.policy = Policy::from_components(std::move(comps),
                                           mode == "sample" ? ActionMode::sample : ActionMode::argmin);
    } catch (const Error& e) {
      fail(ErrorKind::data, std::string("invalid policy in model file: ") + e.what());
    }
    return out;
  });
}

std::string hmm_to_json(const HmmParams& params, const std::map<std::string, std::string>& meta) {
  ordered_json j;
  j["format"] = "hmm";
  j["version"] = kVersion;
  j["meta"] = meta;
  j["initial"] = vec_json(params.initial);
  j["transition"] = table_json(params.transition);
  j["emission"] = table_json(params.emission);
  return j.dump(1) + "\n";
}

HmmParams hmm_from_json(const std::string& text) {
  auto j = parse(text);
  check_format(j, "hmm");
  return guarded([&] {
    HmmParams p;
    p.initial = vec_from(j.at("initial"));
    p.transition = table_from(j.at("transition"));
    p.emission = table_from(j.at("emission"));
    const auto K = p.initial.size();
    require(p.transition.rows == K && p.transition.cols == K && p.emission.rows == K,
            ErrorKind::data, "inconsistent HMM table sizes");
    return p;
  });
}

std::string mixture_to_json(const MultinomialMixtureParams& params,
                            const std::map<std::string, std::string>& meta) {
  ordered_json j;
  j["format"] = "mixture";
  j["version"] = kVersion;
  j["meta"] = meta;
  j["rho"] = vec_json(params.rho);
  j["theta"] = table_json(params.theta);
  return j.dump(1) + "\n";
}

MultinomialMixtureParams mixture_from_json(const std::string& text) {
  auto j = parse(text);
  check_format(j, "mixture");
  return guarded([&] {
    MultinomialMixtureParams p;
    p.rho = vec_from(j.at("rho"));
    p.theta = table_from(j.at("theta"));
    require(p.theta.rows == p.rho.size(), ErrorKind::data, "inconsistent mixture table sizes");
    return p;
  });
}

std::string model_format(const std::string& text) {
  auto j = parse(text);
  require(j.is_object() && j.contains("format"), ErrorKind::data, "model file has no format");
  return j["format"].get<std::string>();
}

std::map<std::string, std::string> model_meta(const std::string& text) {
  auto j = parse(text);
  return guarded([&] {
    if (j.contains("task")) return j["task"].get<std::map<std::string, std::string>>();
    if (j.contains("meta")) return j["meta"].get<std::map<std::string, std::string>>();
    return std::map<std::string, std::string>{};
  });
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

}  // namespace searn
