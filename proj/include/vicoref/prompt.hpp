#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"
#include "vicoref/utf8.hpp"

namespace vicoref {

struct FewShotExemplar {
  std::string indexed_text;
  ClusterSet gold_clusters;
};

// Token budget enforced on the final prompt. Estimation is a configurable
// characters-per-token ratio with a safety margin; the exact tokenizer is
// endpoint-specific and out of scope.
struct TokenBudget {
  std::size_t max_tokens = 8192;
  double chars_per_token = 4.0;
  double safety_margin = 0.10;
};

inline std::size_t estimate_tokens(std::string_view prompt, const TokenBudget& budget) {
  const double chars = static_cast<double>(utf8::length(prompt));
  return static_cast<std::size_t>(
      std::ceil(chars / budget.chars_per_token * (1.0 + budget.safety_margin)));
}

// Instruction blocks are fixed and versioned so a run manifest pins the exact
// prompt wording.
struct PromptTemplate {
  std::string version = "v1";
  std::string preamble =
      "You are given Vietnamese texts in which every mention of a person or group of "
      "people is marked as [mention]#index, where index numbers the mentions in reading "
      "order. Mentions that refer to the same entity form one cluster. For each input, "
      "return the clusters as a list of lists of mention indices, for example: "
      "[[1,5],[2,3,6],[4,7]]. Every mention index must appear in exactly one cluster. "
      "Return only the list.";
  std::string request =
      "Now resolve the coreference clusters for the following text. Return only the list "
      "of clusters.";
};

// The few-shot block: preamble, then one Input/Output pair per exemplar, in order.
inline std::string build_fewshot_prompt(const std::vector<FewShotExemplar>& exemplars,
                                        const PromptTemplate& tmpl = {}) {
  if (exemplars.empty()) {
    throw ConfigError("a few-shot prompt requires at least one exemplar");
  }
  std::string out = tmpl.preamble;
  out += "\n\n";
  for (const FewShotExemplar& e : exemplars) {
    out += "Input: ";
    out += e.indexed_text;
    out += "\nOutput: ";
    out += serialize_clusters(e.gold_clusters);
    out += "\n\n";
  }
  return out;
}

// Final prompt: few-shot block + request + the target's indexed text, ending
// with a bare "Output:" for the model to complete. Throws BudgetExceededError
// when the estimate is over budget.
inline std::string build_final_prompt(const std::string& fewshot, const IndexedDocument& target,
                                      const TokenBudget& budget = {},
                                      const PromptTemplate& tmpl = {}) {
  if (budget.max_tokens == 0) throw ConfigError("token budget must be positive");
  std::string out = fewshot;
  out += tmpl.request;
  out += "\nInput: ";
  out += target.indexed_text;
  out += "\nOutput:";
  const std::size_t estimate = estimate_tokens(out, budget);
  if (estimate > budget.max_tokens) throw BudgetExceededError(estimate, budget.max_tokens);
  return out;
}

}  // namespace vicoref
