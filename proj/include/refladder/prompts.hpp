// Judge prompt templates and reply parsers.
//
// Templates use {name} slots; "{{" and "}}" stand for literal braces. In the
// pairwise templates the reference always fills the Assistant A slot and the
// policy output the Assistant B slot, so a "[[B]]" verdict is a policy win.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refladder/core.hpp"

namespace refladder {

enum class PromptVariant { Default, Criteria, Pointwise };

std::string_view to_string(PromptVariant v);
PromptVariant parse_prompt_variant(std::string_view name);

extern const std::string_view kDefaultPairwiseTemplate;
extern const std::string_view kCriteriaPairwiseTemplate;
extern const std::string_view kPointwiseTemplate;

std::string_view prompt_template(PromptVariant v);

/// Fills {name} slots from `values`. Throws ConfigError on an unknown slot or
/// an unmatched brace.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Criteria block: one criterion per line.
std::string format_criteria(const std::vector<std::string>& criteria);

/// Pairwise prompt for the Default or Criteria variant. Criteria are required
/// for (and only used by) the Criteria variant.
std::string render_pairwise_prompt(PromptVariant variant, std::string_view instruction_text,
                                   std::string_view reference_text, std::string_view policy_text,
                                   const std::optional<std::vector<std::string>>& criteria = std::nullopt);

std::string render_pointwise_prompt(std::string_view criteria, std::string_view query, std::string_view response);

class VerdictParseError : public Error {
 public:
  using Error::Error;
};

/// The last of [[A]], [[B]], [[C]] in the reply decides: B is a policy win,
/// A a loss, C a tie.
Verdict parse_pairwise_verdict(std::string_view reply);

/// Integer "score" in [1, 10] from the first JSON object in the reply that
/// has a "score" field. Code fences around the object are fine.
int parse_pointwise_score(std::string_view reply);

}  // namespace refladder
