#include "searn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "searn/error.hpp"
#include "searn/rng.hpp"

namespace searn {

namespace {

constexpr std::uint64_t kParamStream = 1;
constexpr std::uint64_t kDataStream = 2;

void fill_distribution(std::span<double> row, std::mt19937_64& rng, double power = 1.0) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double total = 0.0;
  for (double& x : row) {
    x = std::pow(unif(rng), power);
    total += x;
  }
  for (double& x : row) x /= total;
}

Table random_rows(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double power = 1.0) {
  Table t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) fill_distribution(t.row(r), rng, power);
  return t;
}

int draw(std::span<const double> p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(p.size()) - 1;
}

std::string located(const std::string& source, std::size_t line, const std::string& msg) {
  return source + ":" + std::to_string(line) + ": " + msg;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path + " for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << '\n';
}

bool parse_int(const std::string& s, long long& v) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

bool is_blank_or_comment(const std::string& line) {
  auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// Reads the `key=<int>` header, skipping comments.
std::size_t read_header(std::istream& in, const std::string& source, const std::string& key,
                        std::size_t& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    long long v = 0;
    if (line.rfind(key + "=", 0) != 0 || !parse_int(line.substr(key.size() + 1), v) || v < 1) {
      fail(ErrorKind::data, located(source, lineno, "expected header " + key + "=<positive int>"));
    }
    return static_cast<std::size_t>(v);
  }
  fail(ErrorKind::data, source + ": missing header " + key + "=<int>");
}

}  // namespace

void validate(const HmmGenConfig& cfg) {
  require(cfg.order == 1 || cfg.order == 2, ErrorKind::config, "HMM order must be 1 or 2");
  require(cfg.K >= 2 && cfg.V >= 2, ErrorKind::config, "K and V must be at least 2");
  require(cfg.n_sequences >= 1, ErrorKind::config, "at least one sequence is required");
  require(cfg.mean_length > 0.0, ErrorKind::config, "mean length must be positive");
}

HmmGenParams gen_hmm_params(const HmmGenConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(mix_seed({cfg.seed, kParamStream}));
  HmmGenParams p;
  p.order = cfg.order;
  p.initial.resize(cfg.K);
  fill_distribution(p.initial, rng);
  p.transition = random_rows(cfg.K, cfg.K, rng);
  if (cfg.order == 2) p.transition2 = random_rows(cfg.K * cfg.K, cfg.K, rng);
  p.emission = random_rows(cfg.K, cfg.V, rng);
  return p;
}

HmmParams first_order_params(const HmmGenParams& params) {
  return {params.initial, params.transition, params.emission};
}

std::vector<LabeledSequence> gen_hmm_dataset(const HmmGenParams& params, const HmmGenConfig& cfg) {
  validate(cfg);
  const std::size_t K = params.initial.size();
  require(K == cfg.K && params.emission.cols == cfg.V, ErrorKind::parameter,
          "parameters do not match the generator config");
  std::mt19937_64 rng(mix_seed({cfg.seed, kDataStream}));
  std::poisson_distribution<int> length(cfg.mean_length);
  std::vector<LabeledSequence> out;
  for (std::size_t n = 0; n < cfg.n_sequences; ++n) {
    const auto T = static_cast<std::size_t>(std::max(2, length(rng)));
    LabeledSequence s;
    for (std::size_t t = 0; t < T; ++t) {
      int y;
      if (t == 0) {
        y = draw(params.initial, rng);
      } else if (params.order == 1 || t == 1) {
        y = draw(params.transition.row(static_cast<std::size_t>(s.labels[t - 1])), rng);
      } else {
        auto row = static_cast<std::size_t>(s.labels[t - 2]) * K +
                   static_cast<std::size_t>(s.labels[t - 1]);
        y = draw(params.transition2.row(row), rng);
      }
      s.labels.push_back(y);
      s.x.symbols.push_back(draw(params.emission.row(static_cast<std::size_t>(y)), rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledDocument> gen_documents(const MixtureGenConfig& cfg) {
  require(cfg.K >= 1 && cfg.V >= 2, ErrorKind::config, "need K >= 1 and V >= 2");
  require(cfg.n_docs >= 1 && cfg.mean_length > 0.0, ErrorKind::config,
          "need documents of positive mean length");
  std::mt19937_64 rng(mix_seed({cfg.seed, kParamStream}));
  std::vector<double> rho(cfg.K);
  fill_distribution(rho, rng);
  Table theta = random_rows(cfg.K, cfg.V, rng);
  std::poisson_distribution<int> length(cfg.mean_length);
  std::vector<LabeledDocument> out;
  for (std::size_t n = 0; n < cfg.n_docs; ++n) {
    LabeledDocument d;
    d.cluster = draw(rho, rng);
    std::vector<int> dense(cfg.V, 0);
    const int len = std::max(1, length(rng));
    for (int w = 0; w < len; ++w) ++dense[static_cast<std::size_t>(draw(theta.row(static_cast<std::size_t>(d.cluster)), rng))];
    d.doc = DocumentCounts::from_dense(dense);
    out.push_back(std::move(d));
  }
  return out;
}

void validate(const TreebankGenConfig& cfg) {
  require(cfg.tagset_size >= 2, ErrorKind::config, "tagset size must be at least 2");
  require(cfg.max_length >= 2, ErrorKind::config, "max length must be at least 2");
  require(cfg.n_sentences >= 1, ErrorKind::config, "at least one sentence is required");
  require(cfg.stop_probability > 0.0 && cfg.stop_probability <= 1.0, ErrorKind::config,
          "stop probability must lie in (0, 1]");
}

std::vector<TaggedSentence> gen_treebank(const TreebankGenConfig& cfg) {
  validate(cfg);
  const std::size_t G = cfg.tagset_size;
  std::mt19937_64 prng(mix_seed({cfg.seed, kParamStream}));
  // Strongly skewed tables: the likeliest dependent tag of a head carries
  // about two thirds of the mass, so tags carry information about attachments.
  std::vector<double> root(G);
  fill_distribution(root, prng, 16.0);
  Table left = random_rows(G, G, prng, 16.0);
  Table right = random_rows(G, G, prng, 16.0);

  std::mt19937_64 rng(mix_seed({cfg.seed, kDataStream}));
  std::geometric_distribution<int> deps(cfg.stop_probability);

  struct Node {
    int tag;
    std::vector<int> left;   // nearest first
    std::vector<int> right;  // nearest first
  };

  std::vector<TaggedSentence> out;
  out.reserve(cfg.n_sentences);
  for (std::size_t n = 0; n < cfg.n_sentences; ++n) {
    std::vector<Node> nodes;
    nodes.push_back({draw(root, rng), {}, {}});
    std::deque<int> frontier{0};
    while (!frontier.empty()) {
      const int h = frontier.front();
      frontier.pop_front();
      const int nl = deps(rng);
      const int nr = deps(rng);
      for (int side = 0; side < 2; ++side) {
        const int count = side == 0 ? nl : nr;
        for (int c = 0; c < count && nodes.size() < cfg.max_length; ++c) {
          const auto& table = side == 0 ? left : right;
          const int tag = draw(table.row(static_cast<std::size_t>(nodes[static_cast<std::size_t>(h)].tag)), rng);
          const int id = static_cast<int>(nodes.size());
          nodes.push_back({tag, {}, {}});
          auto& head = nodes[static_cast<std::size_t>(h)];
          (side == 0 ? head.left : head.right).push_back(id);
          frontier.push_back(id);
        }
      }
    }
    // Linearize: far-left dependents first, then the head, then the right
    // dependents nearest first.
    std::vector<int> order;
    std::function<void(int)> visit = [&](int id) {
      const auto& node = nodes[static_cast<std::size_t>(id)];
      for (auto it = node.left.rbegin(); it != node.left.rend(); ++it) visit(*it);
      order.push_back(id);
      for (int r : node.right) visit(r);
    };
    visit(0);
    std::vector<int> position(nodes.size());
    for (std::size_t p = 0; p < order.size(); ++p) position[static_cast<std::size_t>(order[p])] = static_cast<int>(p) + 1;

    TaggedSentence s;
    DependencyTree tree;
    tree.heads.assign(nodes.size(), 0);
    s.tags.resize(nodes.size());
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      const auto& node = nodes[id];
      const int pos = position[id];
      s.tags[static_cast<std::size_t>(pos - 1)] = node.tag;
      for (int c : node.left) tree.heads[static_cast<std::size_t>(position[static_cast<std::size_t>(c)] - 1)] = pos;
      for (int c : node.right) tree.heads[static_cast<std::size_t>(position[static_cast<std::size_t>(c)] - 1)] = pos;
    }
    require(is_valid_tree(tree) && is_projective(tree), ErrorKind::internal,
            "treebank generator produced an invalid tree");
    s.gold = std::move(tree);
    out.push_back(std::move(s));
  }
  return out;
}

Split split_of(std::size_t index) {
  switch (splitmix64(index) % 12) {
    case 10: return Split::dev;
    case 11: return Split::test;
    default: return Split::train;
  }
}

// ---------------------------------------------------------------------------

ConllCorpus read_conll(std::istream& in, const std::string& source) {
  ConllCorpus corpus;
  struct Row {
    std::size_t line;
    int tag;
    long long head;  // -1 for "_"
  };
  std::vector<Row> rows;

  auto flush = [&]() {
    if (rows.empty()) return;
    const auto T = static_cast<long long>(rows.size());
    TaggedSentence s;
    std::size_t unannotated = 0;
    for (const auto& r : rows) {
      s.tags.push_back(r.tag);
      if (r.head < 0) {
        ++unannotated;
      } else if (r.head > T) {
        fail(ErrorKind::data, located(source, r.line, "head " + std::to_string(r.head) +
                                                          " is out of range for a sentence of " +
                                                          std::to_string(T) + " tokens"));
      }
    }
    if (unannotated != 0 && unannotated != rows.size()) {
      fail(ErrorKind::data, located(source, rows.front().line,
                                    "sentence mixes annotated and unannotated heads"));
    }
    if (unannotated == 0) {
      DependencyTree tree;
      for (const auto& r : rows) tree.heads.push_back(static_cast<int>(r.head));
      if (!is_valid_tree(tree)) {
        fail(ErrorKind::data, located(source, rows.front().line, "heads do not form a tree"));
      }
      if (!is_projective(tree)) {
        ++corpus.rejected_nonprojective;
        rows.clear();
        return;
      }
      s.gold = std::move(tree);
    }
    corpus.sentences.push_back(std::move(s));
    rows.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) {
      flush();
      continue;
    }
    if (line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> cols;
    for (std::string c; fields >> c;) cols.push_back(c);
    if (cols.size() != 3) {
      fail(ErrorKind::data, located(source, lineno, "expected 3 columns (index, tag, head), found " +
                                                        std::to_string(cols.size())));
    }
    long long index = 0;
    long long tag = 0;
    long long head = -1;
    if (!parse_int(cols[0], index) || index != static_cast<long long>(rows.size()) + 1) {
      fail(ErrorKind::data, located(source, lineno, "expected token index " +
                                                        std::to_string(rows.size() + 1)));
    }
    if (!parse_int(cols[1], tag) || tag < 0) {
      fail(ErrorKind::data, located(source, lineno, "tag must be a nonnegative integer"));
    }
    if (cols[2] != "_" && (!parse_int(cols[2], head) || head < 0)) {
      fail(ErrorKind::data, located(source, lineno, "head must be a nonnegative integer or _"));
    }
    rows.push_back({lineno, static_cast<int>(tag), head});
  }
  flush();
  return corpus;
}

ConllCorpus load_conll(const std::string& path) {
  auto in = open_in(path);
  return read_conll(in, path);
}

void write_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences,
                 const std::vector<std::string>& header) {
  write_header(out, header);
  for (std::size_t n = 0; n < sentences.size(); ++n) {
    const auto& s = sentences[n];
    if (n > 0) out << '\n';
    for (std::size_t t = 0; t < s.size(); ++t) {
      out << t + 1 << '\t' << s.tags[t] << '\t';
      if (s.gold) {
        out << s.gold->heads[t];
      } else {
        out << '_';
      }
      out << '\n';
    }
  }
}

void write_conll(const std::string& path, const std::vector<TaggedSentence>& sentences,
                 const std::vector<std::string>& header) {
  auto out = open_out(path);
  write_conll(out, sentences, header);
  finish_write(out, path);
}

IntSequenceFile read_sequences(std::istream& in, const std::string& source,
                               const std::string& key) {
  IntSequenceFile file;
  file.key = key;
  std::size_t lineno = 0;
  file.value = read_header(in, source, key, lineno);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    std::istringstream fields(line);
    std::vector<int> row;
    for (std::string tok; fields >> tok;) {
      long long v = 0;
      if (!parse_int(tok, v) || v < 0 || v >= static_cast<long long>(file.value)) {
        fail(ErrorKind::data, located(source, lineno, "symbol '" + tok + "' is not in [0, " +
                                                          std::to_string(file.value) + ")"));
      }
      row.push_back(static_cast<int>(v));
    }
    file.rows.push_back(std::move(row));
  }
  return file;
}

IntSequenceFile load_sequences(const std::string& path, const std::string& key) {
  auto in = open_in(path);
  return read_sequences(in, path, key);
}

void write_sequences(const std::string& path, const IntSequenceFile& file,
                     const std::vector<std::string>& header) {
  auto out = open_out(path);
  write_header(out, header);
  out << file.key << '=' << file.value << '\n';
  for (const auto& row : file.rows) {
    for (std::size_t t = 0; t < row.size(); ++t) out << (t ? " " : "") << row[t];
    out << '\n';
  }
  finish_write(out, path);
}

DocumentFile read_documents(std::istream& in, const std::string& source) {
  DocumentFile file;
  std::size_t lineno = 0;
  file.V = read_header(in, source, "V", lineno);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    std::istringstream fields(line);
    std::vector<int> dense(file.V, 0);
    for (std::string tok; fields >> tok;) {
      auto colon = tok.find(':');
      long long w = 0;
      long long c = 0;
      if (colon == std::string::npos || !parse_int(tok.substr(0, colon), w) ||
          !parse_int(tok.substr(colon + 1), c) || w < 0 ||
          w >= static_cast<long long>(file.V) || c < 0) {
        fail(ErrorKind::data, located(source, lineno, "bad word:count pair '" + tok + "'"));
      }
      dense[static_cast<std::size_t>(w)] += static_cast<int>(c);
    }
    auto doc = DocumentCounts::from_dense(dense);
    if (doc.total < 1) fail(ErrorKind::data, located(source, lineno, "document has no words"));
    file.docs.push_back(std::move(doc));
  }
  return file;
}

DocumentFile load_documents(const std::string& path) {
  auto in = open_in(path);
  return read_documents(in, path);
}

void write_documents(const std::string& path, const DocumentFile& file,
                     const std::vector<std::string>& header) {
  auto out = open_out(path);
  write_header(out, header);
  out << "V=" << file.V << '\n';
  for (const auto& d : file.docs) {
    for (std::size_t i = 0; i < d.counts.size(); ++i) {
      out << (i ? " " : "") << d.counts[i].first << ':' << d.counts[i].second;
    }
    out << '\n';
  }
  finish_write(out, path);
}

}  // namespace searn
