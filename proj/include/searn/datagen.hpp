#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "searn/data.hpp"
#include "searn/em.hpp"
#include "searn/table.hpp"

namespace searn {

struct HmmGenConfig {
  int order = 1;
  std::size_t K = 2;
  std::size_t V = 10;
  std::size_t n_sequences = 5;
  double mean_length = 40.0;
  std::uint64_t seed = 0;
};

void validate(const HmmGenConfig& cfg);

// Generating tables. Order 2 draws the second state from `transition` and
// every later state from `transition2`, whose row (a * K + b) holds
// P(y_t | y_{t-2} = a, y_{t-1} = b).
struct HmmGenParams {
  int order = 1;
  std::vector<double> initial;
  Table transition;
  Table transition2;
  Table emission;

  bool operator==(const HmmGenParams&) const = default;
};

HmmGenParams gen_hmm_params(const HmmGenConfig& cfg);
// The first-order part; exact for order 1.
HmmParams first_order_params(const HmmGenParams& params);

struct LabeledSequence {
  SymbolSequence x;
  std::vector<int> labels;  // gold states, for evaluation only
  bool operator==(const LabeledSequence&) const = default;
};

// Lengths are Poisson(mean_length), at least 2. Uses a stream independent of
// the one that drew the parameters.
std::vector<LabeledSequence> gen_hmm_dataset(const HmmGenParams& params, const HmmGenConfig& cfg);

struct MixtureGenConfig {
  std::size_t K = 2;
  std::size_t V = 5;
  std::size_t n_docs = 10;
  double mean_length = 20.0;
  std::uint64_t seed = 0;
};

struct LabeledDocument {
  DocumentCounts doc;
  int cluster = 0;
};

std::vector<LabeledDocument> gen_documents(const MixtureGenConfig& cfg);

struct TreebankGenConfig {
  std::size_t tagset_size = 12;
  std::size_t max_length = 10;
  std::size_t n_sentences = 500;
  double stop_probability = 0.6;
  std::uint64_t seed = 0;
};

void validate(const TreebankGenConfig& cfg);

// Head-outward generation: projective by construction.
std::vector<TaggedSentence> gen_treebank(const TreebankGenConfig& cfg);

enum class Split { train, dev, test };
// Deterministic 10:1:1 assignment by a hash of the sentence index.
Split split_of(std::size_t index);

// ---------------------------------------------------------------------------
// Corpus files. Lines starting with '#' are comments.

struct ConllCorpus {
  std::vector<TaggedSentence> sentences;
  std::size_t rejected_nonprojective = 0;
};

// `index tag head` per token, tab separated, blank line between sentences.
// A head of "_" on every token marks an unannotated sentence.
ConllCorpus read_conll(std::istream& in, const std::string& source);
ConllCorpus load_conll(const std::string& path);
void write_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences,
                 const std::vector<std::string>& header = {});
void write_conll(const std::string& path, const std::vector<TaggedSentence>& sentences,
                 const std::vector<std::string>& header = {});

// Header line `<key>=<int>`, then one space-separated integer sequence per
// line. Sequence corpora use key V, gold labelings use key K.
struct IntSequenceFile {
  std::string key;
  std::size_t value = 0;
  std::vector<std::vector<int>> rows;
};

IntSequenceFile read_sequences(std::istream& in, const std::string& source,
                               const std::string& key);
IntSequenceFile load_sequences(const std::string& path, const std::string& key = "V");
void write_sequences(const std::string& path, const IntSequenceFile& file,
                     const std::vector<std::string>& header = {});

// Header `V=<int>`, then one document per line as `word_id:count` pairs.
struct DocumentFile {
  std::size_t V = 0;
  std::vector<DocumentCounts> docs;
};

DocumentFile read_documents(std::istream& in, const std::string& source);
DocumentFile load_documents(const std::string& path);
void write_documents(const std::string& path, const DocumentFile& file,
                     const std::vector<std::string>& header = {});

}  // namespace searn
