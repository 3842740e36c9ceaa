#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "p2f/backend.hpp"
#include "p2f/core.hpp"

namespace p2f {

/// P2F_V3 names the third obfuscation wording, which was never published;
/// asking for it raises DirectiveUnavailable.
enum class DirectiveScheme { P2F_V1, P2F_V2, P2F_V3, DI_V1, DI_V2, DI_V3, DI_V4 };

class DirectiveUnavailable : public Error {
 public:
  using Error::Error;
};

std::string_view to_string(DirectiveScheme scheme);
/// Accepts "P2F_V1", "p2f-v1", "DI_V3", "di-v3" and so on.
DirectiveScheme parse_directive_scheme(std::string_view name);
bool is_p2f(DirectiveScheme scheme);

struct ObfuscationDirective {
  DirectiveScheme scheme = DirectiveScheme::P2F_V1;
  std::string rendered;
};

ObfuscationDirective build_directive(DirectiveScheme scheme);

struct ObfuscationSession {
  ObfuscationSession(QuestionRecord question, Session session, DirectiveScheme scheme);

  QuestionRecord question;
  std::vector<SubQA> sub_qas;
  /// Chosen synthetic sub-answer per sub-question.
  std::vector<std::string> synthetics;
  std::vector<std::string> combined;
  Session session;
  DirectiveScheme scheme;
  /// True once the combined questions already appear in the transcript (LLM
  /// combination). Otherwise the directive message lists them first.
  bool combined_in_transcript = false;
  std::string acknowledgment;
};

/// The user message apply_obfuscation sends.
std::string obfuscation_message(const ObfuscationSession& session);

/// Sends the directive as one query and records the reply. P2F schemes need
/// synthetics and combined questions; DI schemes must have neither.
void apply_obfuscation(ObfuscationSession& session);

}  // namespace p2f
