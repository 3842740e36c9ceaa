#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace p2f::assets {

struct AssetEntry {
  std::string_view path;
  std::string_view content;
};

/// Every file under assets/, compiled in at configure time, sorted by path.
std::span<const AssetEntry> embedded();

/// Raw bytes of an embedded asset. Throws p2f::Error for unknown paths.
std::string_view raw(std::string_view path);

/// Asset text with the trailing newline removed.
std::string text(std::string_view path);

/// Replaces each `{name}` in `tmpl` with its value. Unknown placeholders are
/// left untouched.
std::string render(std::string_view tmpl,
                   std::initializer_list<std::pair<std::string_view, std::string>> values);

std::string sha256_hex(std::string_view data);

/// SHA-256 over "path\0content\0" for every embedded asset, in path order.
/// Recorded in run manifests to pin the prompt catalog.
std::string catalog_digest();

}  // namespace p2f::assets
