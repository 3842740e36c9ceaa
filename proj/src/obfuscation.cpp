#include "p2f/obfuscation.hpp"

#include <array>
#include <cctype>
#include <utility>

#include "p2f/assets.hpp"

namespace p2f {
namespace {

struct SchemeInfo {
  DirectiveScheme scheme;
  std::string_view name;
  std::string_view asset;
};

constexpr std::array<SchemeInfo, 7> kSchemes = {{
    {DirectiveScheme::P2F_V1, "P2F_V1", "prompts/obfuscation_p2f_v1.txt"},
    {DirectiveScheme::P2F_V2, "P2F_V2", "prompts/obfuscation_p2f_v2.txt"},
    {DirectiveScheme::P2F_V3, "P2F_V3", ""},
    {DirectiveScheme::DI_V1, "DI_V1", "prompts/direct_instruction_v1.txt"},
    {DirectiveScheme::DI_V2, "DI_V2", "prompts/direct_instruction_v2.txt"},
    {DirectiveScheme::DI_V3, "DI_V3", "prompts/direct_instruction_v3.txt"},
    {DirectiveScheme::DI_V4, "DI_V4", "prompts/direct_instruction_v4.txt"},
}};

const SchemeInfo& info(DirectiveScheme scheme) {
  for (const auto& s : kSchemes) {
    if (s.scheme == scheme) return s;
  }
  throw InvalidArgument("unknown directive scheme");
}

}  // namespace

std::string_view to_string(DirectiveScheme scheme) { return info(scheme).name; }

DirectiveScheme parse_directive_scheme(std::string_view name) {
  std::string canon;
  for (char c : name) canon += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& s : kSchemes) {
    if (s.name == canon) return s.scheme;
  }
  throw InvalidArgument("unknown directive scheme '" + std::string(name) +
                        "' (expected P2F_V1, P2F_V2, DI_V1 .. DI_V4)");
}

bool is_p2f(DirectiveScheme scheme) {
  return scheme == DirectiveScheme::P2F_V1 || scheme == DirectiveScheme::P2F_V2 ||
         scheme == DirectiveScheme::P2F_V3;
}

ObfuscationDirective build_directive(DirectiveScheme scheme) {
  const auto& s = info(scheme);
  if (s.asset.empty()) {
    throw DirectiveUnavailable("directive " + std::string(s.name) +
                               " is unavailable: its text was never published");
  }
  return {scheme, assets::text(s.asset)};
}

ObfuscationSession::ObfuscationSession(QuestionRecord question, Session session,
                                       DirectiveScheme scheme)
    : question(std::move(question)), session(std::move(session)), scheme(scheme) {}

std::string obfuscation_message(const ObfuscationSession& s) {
  const auto directive = build_directive(s.scheme);
  if (!is_p2f(s.scheme) || s.combined_in_transcript) return directive.rendered;
  std::string out;
  for (std::size_t i = 0; i < s.combined.size(); ++i) {
    out += "Ground Truth Question " + std::to_string(i + 1) + ": " + s.combined[i] + "\n";
  }
  out += "\n" + directive.rendered;
  return out;
}

void apply_obfuscation(ObfuscationSession& s) {
  if (is_p2f(s.scheme)) {
    if (s.synthetics.empty() || s.combined.empty()) {
      throw InvalidArgument(std::string(to_string(s.scheme)) +
                            " needs synthetic sub-answers and combined questions");
    }
  } else if (!s.synthetics.empty() || !s.combined.empty()) {
    throw InvalidArgument(std::string(to_string(s.scheme)) +
                          " is a direct instruction and must not carry synthetic content");
  }
  s.acknowledgment = s.session.query(obfuscation_message(s));
}

}  // namespace p2f
