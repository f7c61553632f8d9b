#include "refladder/prompts.hpp"

#include <cmath>

#include <json.hpp>

namespace refladder {

const std::string_view kDefaultPairwiseTemplate =
    R"(Please act as an impartial judge and evaluate the quality of the responses provided by two AI assistants to the user question displayed below. You should choose the assistant that follows the user's instructions and answers the user's question better. Your evaluation should consider factors such as the helpfulness, relevance, accuracy, depth, creativity, and level of detail of their responses. Begin your evaluation by comparing the two responses and provide a short explanation. Avoid any position biases and ensure that the order in which the responses were presented does not influence your decision. Do not allow the length of the responses to influence your evaluation. Do not favor certain names of the assistants. Be as objective as possible. After providing your explanation, output your final verdict by strictly following this format: "[[A]]" if assistant A is better, "[[B]]" if assistant B is better, and "[[C]]" for a tie. NOTE: If the response contains severe repetition or redundancy, it should be viewed as low quality score, losing the comparison.

[User Question]
{question}

[The Start of Assistant A's Answer]
{answer_a}
[The End of Assistant A's Answer]

[The Start of Assistant B's Answer]
{answer_b}
[The End of Assistant B's Answer])";

const std::string_view kCriteriaPairwiseTemplate =
    R"(Please act as an impartial judge and evaluate the quality of the responses provided by two AI assistants to the user question displayed below. You should choose the assistant that follows the user's instructions and answers the user's question better. Your evaluation should consider the following dimensions.

{criteria}

Begin your evaluation by comparing the two responses and provide a short explanation. Avoid any position biases and ensure that the order in which the responses were presented does not influence your decision. Do not allow the length of the responses to influence your evaluation. Do not favor certain names of the assistants. Be as objective as possible. After providing your explanation, output your final verdict by strictly following this format: "[[A]]" if assistant A is better, "[[B]]" if assistant B is better, and "[[C]]" for a tie. NOTE: If the response contains severe repetition or redundancy, it should be viewed as low quality score, losing the comparison.

[User Question]
{question}

[The Start of Assistant A's Answer]
{answer_a}
[The End of Assistant A's Answer]

[The Start of Assistant B's Answer]
{answer_b}
[The End of Assistant B's Answer])";

const std::string_view kPointwiseTemplate =
    R"(Evaluate the Response based on the Query and criteria provided.

** Criteria **
```{criteria}```

** Query **
```{query}```

** Response **
```{response}```

Provide your evaluation based on the criteria:

```{criteria}```

Provide reasons for each score, indicating where and why any strengths or deficiencies occur within the Response. Reference specific passages or elements from the text to support your justification.
Ensure that each reason is concrete, with explicit references to the text that aligns with the criteria requirements.

Scoring Range: Assign an integer score between 1 to 10

** Output format **
Return the results in the following JSON format, Only output this JSON format and nothing else:
```json
{{
    "score": an integer score between 1 to 10,
    "reason": "Specific and detailed justification for the score using text elements."
}}
```)";

std::string_view to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::Default:
      return "default";
    case PromptVariant::Criteria:
      return "criteria";
    case PromptVariant::Pointwise:
      return "pointwise";
  }
  return "default";
}

PromptVariant parse_prompt_variant(std::string_view name) {
  if (name == "default") return PromptVariant::Default;
  if (name == "criteria") return PromptVariant::Criteria;
  if (name == "pointwise") return PromptVariant::Pointwise;
  throw ConfigError("unknown prompt variant '" + std::string(name) + "'");
}

std::string_view prompt_template(PromptVariant v) {
  switch (v) {
    case PromptVariant::Default:
      return kDefaultPairwiseTemplate;
    case PromptVariant::Criteria:
      return kCriteriaPairwiseTemplate;
    case PromptVariant::Pointwise:
      return kPointwiseTemplate;
  }
  return kDefaultPairwiseTemplate;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out += '{';
      i += 2;
    } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out += '}';
      i += 2;
    } else if (c == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close == std::string_view::npos) throw ConfigError("template: unmatched '{'");
      const std::string name(tmpl.substr(i + 1, close - i - 1));
      auto it = values.find(name);
      if (it == values.end()) throw ConfigError("template: no value for slot '" + name + "'");
      out += it->second;
      i = close + 1;
    } else if (c == '}') {
      throw ConfigError("template: unmatched '}'");
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

std::string format_criteria(const std::vector<std::string>& criteria) {
  std::string out;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (i > 0) out += '\n';
    out += criteria[i];
  }
  return out;
}

std::string render_pairwise_prompt(PromptVariant variant, std::string_view instruction_text,
                                   std::string_view reference_text, std::string_view policy_text,
                                   const std::optional<std::vector<std::string>>& criteria) {
  std::map<std::string, std::string> values{
      {"question", std::string(instruction_text)},
      {"answer_a", std::string(reference_text)},
      {"answer_b", std::string(policy_text)},
  };
  switch (variant) {
    case PromptVariant::Default:
      return render_template(kDefaultPairwiseTemplate, values);
    case PromptVariant::Criteria:
      if (!criteria || criteria->empty()) throw ConfigError("criteria prompt requires criteria");
      values["criteria"] = format_criteria(*criteria);
      return render_template(kCriteriaPairwiseTemplate, values);
    case PromptVariant::Pointwise:
      break;
  }
  throw ConfigError("pointwise variant is not a pairwise prompt");
}

std::string render_pointwise_prompt(std::string_view criteria, std::string_view query, std::string_view response) {
  return render_template(kPointwiseTemplate, {{"criteria", std::string(criteria)},
                                              {"query", std::string(query)},
                                              {"response", std::string(response)}});
}

Verdict parse_pairwise_verdict(std::string_view reply) {
  struct Marker {
    std::string_view text;
    Verdict verdict;
  };
  static constexpr Marker kMarkers[] = {
      {"[[A]]", Verdict::Loss},
      {"[[B]]", Verdict::Win},
      {"[[C]]", Verdict::Tie},
  };
  std::optional<std::size_t> best_pos;
  Verdict best = Verdict::Loss;
  for (const auto& m : kMarkers) {
    const auto pos = reply.rfind(m.text);
    if (pos != std::string_view::npos && (!best_pos || pos > *best_pos)) {
      best_pos = pos;
      best = m.verdict;
    }
  }
  if (!best_pos) throw VerdictParseError("unparseable verdict");
  return best;
}

namespace {

// End of the balanced {...} starting at `open`, honouring JSON strings.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

int parse_pointwise_score(std::string_view reply) {
  for (std::size_t pos = reply.find('{'); pos != std::string_view::npos; pos = reply.find('{', pos + 1)) {
    const auto end = matching_brace(reply, pos);
    if (!end) continue;
    const auto parsed = nlohmann::json::parse(reply.substr(pos, *end - pos + 1), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) continue;
    auto it = parsed.find("score");
    if (it == parsed.end()) continue;
    if (!it->is_number()) throw VerdictParseError("score is not a number");
    const double value = it->get<double>();
    if (value != std::floor(value)) throw VerdictParseError("score is not an integer");
    if (value < 1.0 || value > 10.0) throw VerdictParseError("score out of range");
    return static_cast<int>(value);
  }
  throw VerdictParseError("no score found");
}

}  // namespace refladder
