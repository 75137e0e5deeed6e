#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "earnvol/baselines.hpp"
#include "earnvol/dataset.hpp"

namespace earnvol {

struct EmbeddingSet {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> vectors;  // event id -> vector
  std::string source;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

// JSON lines: {"event_id": "...", "vector": [...]}. Dimension comes from the
// first row and is enforced for the rest.
EmbeddingSet parse_embeddings(std::istream& in, std::string source = {});
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingSet& set);

enum class RandomMode { All, Ticker };
RandomMode parse_random_mode(std::string_view text);  // all | ticker

// Standard-normal vectors: one per event (All) or one per ticker shared by
// all of its events (Ticker).
EmbeddingSet random_embeddings(std::span<const EarningsEvent> events, RandomMode mode, std::size_t dim,
                               std::uint64_t seed);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct GroupSimilarityReport {
  std::string source;
  double within_ticker = 0.0;
  double all_dataset = 0.0;
  std::size_t within_pairs = 0;
  std::size_t all_pairs = 0;
  std::size_t singleton_tickers = 0;  // tickers with one event, no within pairs
  bool all_excludes_same_ticker = false;
};

// Mean cosine over unordered same-ticker pairs and over all unordered pairs.
// `threads` splits the pair loop; the result does not depend on it.
GroupSimilarityReport group_cosine_similarity(const EmbeddingSet& emb, std::span<const EarningsEvent> events,
                                              bool exclude_same_ticker_from_all = false,
                                              unsigned threads = 1);

double pearson(std::span<const double> a, std::span<const double> b);
// Paired over the event ids both sets carry for `tau`; the key sets must match.
double pearson(const PredictionSet& a, const PredictionSet& b, int tau);

// Ridge regression from event embeddings to post-earnings volatility, fitted
// on the split's train and validation events.
PredictionSet run_embedding_baseline(const EventTable& table, const Split& split, std::span<const int> taus,
                                     const EmbeddingSet& emb, double ridge, std::string label);

}  // namespace earnvol
