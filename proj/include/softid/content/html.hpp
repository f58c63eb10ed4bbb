#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace softid::content {

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultContentCap = 32000;
inline constexpr std::string_view kTruncationMarker = "\n\n[... content truncated ...]";

struct CleanOptions {
  /// Upper bound on the output size in bytes, marker included.
  std::size_t max_chars = kDefaultContentCap;
  /// When non-empty, only text inside elements carrying one of these classes
  /// is emitted.
  std::vector<std::string> keep_classes;
  /// Elements carrying one of these classes are removed with their subtree.
  std::vector<std::string> drop_classes;
};

/// Converts an HTML document to Markdown.
///
/// Scripts, styles, navigation and other page chrome are dropped. Headings,
/// paragraphs, lists, links and preformatted blocks survive as Markdown.
/// Text that is already Markdown passes through unchanged, so the function is
/// idempotent on its own output. Literal '<' that would open a tag is written
/// as "&lt;", which keeps "<script" out of the result.
///
/// Throws ExtractionError when the input is not valid UTF-8.
std::string clean_html(std::string_view html, const CleanOptions& options = {});

bool is_valid_utf8(std::string_view text);

/// Cuts `text` to at most `cap` bytes on a UTF-8 boundary and appends the
/// truncation marker. Returns the input unchanged when it already fits.
std::string truncate_with_marker(std::string text, std::size_t cap);

}  // namespace softid::content
