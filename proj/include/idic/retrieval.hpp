#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "idic/embedding.hpp"
#include "idic/intent.hpp"
#include "idic/state.hpp"

namespace idic {

struct ExampleSource {
  std::string dialogue_id;
  int turn_index = 0;

  auto operator<=>(const ExampleSource&) const = default;
  bool operator==(const ExampleSource&) const = default;
};

// One turn of the few-shot pool.
struct RetrievalExample {
  ExampleSource source;
  std::string query_text;    // masked serialization, embedded for intent-driven retrieval
  std::string context_text;  // unmasked serialization (previous state + last exchange)
  StateChange state_change;  // gold delta of the turn
  std::string prompt_block;  // masked context line + "SQL: ..." line

  bool operator==(const RetrievalExample&) const = default;
};

struct ScoredExample {
  RetrievalExample example;
  double score = 0.0;
};

// What survives masking: turn, domains and intent. History, previous state
// and auxiliary fields are gone; the user input is replaced by a rewrite of
// the intent when there is one.
struct MaskedDialogueInformation {
  int turn_index = 0;
  std::vector<std::string> active_domains;
  Intent intent;
  std::string rewritten_user;

  bool operator==(const MaskedDialogueInformation&) const = default;
};

MaskedDialogueInformation mask(const AugmentedDialogueInformation& aug);

// "[CONTEXT] { attraction area: south } [SYS]  [USER] I want ... [DOMAIN] attraction".
// The turn index is kept in the structure but not rendered.
std::string serialize_masked(const MaskedDialogueInformation& masked);

// "I want a train to hyderabad." Per-slot phrase templates joined with
// " and "; slots without a template read "{domain} with {slot} {value}".
std::string rewrite_user_input(const Intent& intent);

// Dice overlap 2|a n b| / (|a| + |b|); two empty sets score 1.
template <typename T>
double set_f1(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

// Mean of the slot-name F1 and the slot-value-pair F1 of two state changes.
double state_change_similarity(const StateChange& a, const StateChange& b);

enum class QueryField { masked, context };

// Embeds every example's query_text (masked) or context_text (context).
EmbeddingIndex index_pool(std::span<const RetrievalExample> pool,
                          const EmbeddingProvider& provider, QueryField field);

// Cosines are rounded to this many steps per unit before ranking, so equal
// cosines reached along different floating-point paths tie exactly.
inline constexpr double kScoreScale = 1e9;

// Top min(k, |pool|) examples by cosine between `query` and the index rows,
// descending, ties broken by source ascending. `exclude` drops the query's
// own turn. Throws EmptyPool on an empty pool.
std::vector<ScoredExample> retrieve_top_k(std::span<const RetrievalExample> pool,
                                          const EmbeddingIndex& index,
                                          const EmbeddingVector& query, std::size_t k,
                                          const std::optional<ExampleSource>& exclude = {});

std::vector<ScoredExample> retrieve_top_k(std::span<const RetrievalExample> pool,
                                          const EmbeddingIndex& index,
                                          const MaskedDialogueInformation& query, std::size_t k,
                                          const EmbeddingProvider& provider,
                                          const std::optional<ExampleSource>& exclude = {});

// Ground-truth ranking by state-change similarity to the intent's slot
// values, same ordering rules as retrieve_top_k.
std::vector<ScoredExample> brute_force_top_k_by_similarity(
    std::span<const RetrievalExample> pool, const Intent& intent, std::size_t k,
    const std::optional<ExampleSource>& exclude = {});

// Share of `retrieved` whose similarity to `target` reaches the k-th best
// similarity in the pool (ties at the cut-off all count as relevant).
double recall_at_k(std::span<const ScoredExample> retrieved,
                   std::span<const RetrievalExample> pool, const StateChange& target,
                   std::size_t k, const std::optional<ExampleSource>& exclude = {});

struct TrainingPair {
  std::string text_a;
  std::string text_b;
  double score = 0.0;

  bool operator==(const TrainingPair&) const = default;
};

struct MiningOptions {
  std::size_t positives_per_anchor = 2;
  std::size_t negatives_per_anchor = 4;
  double negative_threshold = 0.2;
  std::uint64_t seed = 0;
};

// Per anchor: its highest-scoring peers as positives, then peers drawn
// uniformly from those scoring below the threshold as negatives. Labels are
// the state-change similarity.
std::vector<TrainingPair> mine_training_pairs(std::span<const RetrievalExample> pool,
                                              const MiningOptions& options);

// JSONL {"text_a", "text_b", "score"}.
std::string training_pairs_jsonl(std::span<const TrainingPair> pairs);

}  // namespace idic
