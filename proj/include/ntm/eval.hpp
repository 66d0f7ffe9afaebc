#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntm/corpus.hpp"
#include "ntm/model.hpp"
#include "ntm/prior.hpp"
#include "ntm/rng.hpp"
#include "ntm/tensor.hpp"

namespace ntm::eval {

struct TopWords {
  std::vector<std::vector<std::uint32_t>> ids;      // K lists of n word ids
  std::vector<std::vector<std::string>> words;      // matching tokens
};

// Highest-weight words per topic row; ties broken by the lexicographically
// smaller token. Throws when n > V.
TopWords top_words(const Tensor2& beta_like, const Vocabulary& vocab, std::size_t n);

// NPMI of one word pair from document-level occurrence counts with the joint
// smoothed by 1/(D+1); the result is clamped to [-1, 1]. Marginals of words
// absent from the reference are floored at the smoothing value so the ratio
// stays defined (the floor never affects present words).
double npmi_pair(std::size_t joint_docs, std::size_t docs_i, std::size_t docs_j,
                 std::size_t total_docs);

struct NpmiResult {
  double mean = 0.0;
  std::vector<double> per_topic;
};

// Average NPMI over all unordered word pairs inside each topic list;
// probabilities are document frequencies in the reference corpus.
NpmiResult npmi_coherence(const std::vector<std::vector<std::string>>& topics,
                          const Corpus& reference);

// exp(-sum_d elbo_d / total_tokens) with the ELBO evaluated in inference mode
// using `samples` Monte Carlo draws.
double perplexity(TopicModel& model, const Corpus& corpus, int samples = 1,
                  std::uint64_t seed = 0);

struct SparsityProfile {
  double mean_entropy = 0.0;   // nats
  double mean_top5_mass = 0.0;
};

SparsityProfile sparsity_profile(const LogisticNormalParams& params, std::size_t samples,
                                 Rng& rng);

struct CompareInferenceOptions {
  int steps = 150;
  double lr = 0.02;
  int samples = 4;  // eps draws shared between the two arms
  std::uint64_t seed = 0;
  std::size_t batch_size = 512;
};

struct CompareInferenceResult {
  double perplexity_network_only = 0.0;
  double perplexity_optimized = 0.0;
  double elbo_network_only = 0.0;  // sums over documents
  double elbo_optimized = 0.0;
};

// Arm 1 scores documents straight from the inference network. Arm 2 starts
// from those variational parameters and optimizes them per document against
// the ELBO with the topic matrix frozen, keeping each document's best value.
CompareInferenceResult compare_inference(TopicModel& model, const Corpus& test,
                                         const CompareInferenceOptions& opts = {});

struct EvalReport {
  double coherence = 0.0;
  std::vector<double> per_topic_npmi;
  double perplexity = 0.0;
  double mean_entropy = 0.0;
  double mean_top5_mass = 0.0;
  double diversity = 0.0;
  std::vector<std::vector<std::string>> top_words;
};

// Structured text with stable key order followed by an aligned topic table.
void write_report(std::ostream& os, const EvalReport& report);

// Topic matrix interchange format: K lines of V probabilities.
void write_topic_matrix(const Tensor2& beta, const std::string& path);
Tensor2 read_topic_matrix(const std::string& path);

}  // namespace ntm::eval
