#include "p2f/assets.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "p2f/core.hpp"

namespace p2f::assets {

std::string_view raw(std::string_view path) {
  for (const auto& entry : embedded()) {
    if (entry.path == path) return entry.content;
  }
  throw Error("unknown asset '" + std::string(path) + "'");
}

std::string text(std::string_view path) {
  std::string_view content = raw(path);
  while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
    content.remove_suffix(1);
  }
  return std::string(content);
}

std::string render(std::string_view tmpl,
                   std::initializer_list<std::pair<std::string_view, std::string>> values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        bool replaced = false;
        for (const auto& [key, value] : values) {
          if (key == name) {
            out += value;
            replaced = true;
            break;
          }
        }
        if (replaced) {
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string catalog_digest() {
  std::string blob;
  for (const auto& entry : embedded()) {
    blob.append(entry.path);
    blob.push_back('\0');
    blob.append(entry.content);
    blob.push_back('\0');
  }
  return sha256_hex(blob);
}

}  // namespace p2f::assets
