#include "softid/content/html.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

namespace softid::content {

namespace {

const std::set<std::string_view> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr"};

// Contents are never markup; skipped wholesale.
const std::set<std::string_view> kRawTextElements = {"script", "style", "textarea", "title",
                                                     "xmp"};

const std::set<std::string_view> kRemovedElements = {
    "head",   "nav",      "header", "footer", "aside",  "form",   "noscript", "iframe",
    "svg",    "button",   "select", "template", "object", "canvas", "dialog", "menu"};

const std::set<std::string_view> kRemovedRoles = {"navigation", "banner", "contentinfo",
                                                  "search"};

const std::set<std::string_view> kParagraphElements = {
    "p",     "div",    "section", "article",  "main",   "blockquote", "table", "dl",
    "figure", "figcaption", "address", "details", "summary", "center", "ul", "ol"};

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::vector<std::pair<std::string, std::string>> attrs;

  std::string_view attr(std::string_view key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return v;
    return {};
  }
};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

constexpr std::pair<std::string_view, std::uint32_t> kNamedEntities[] = {
    {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
    {"apos", '\''},    {"nbsp", ' '},     {"copy", 0xA9},    {"reg", 0xAE},
    {"trade", 0x2122}, {"mdash", 0x2014}, {"ndash", 0x2013}, {"hellip", 0x2026},
    {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
    {"bull", 0x2022},  {"middot", 0xB7},  {"laquo", 0xAB},   {"raquo", 0xBB},
    {"times", 0xD7},   {"deg", 0xB0},     {"eacute", 0xE9},  {"uuml", 0xFC},
};

// Decodes the entity starting at s[0] == '&'. Returns the code point and the
// number of bytes consumed.
std::optional<std::pair<std::uint32_t, std::size_t>> decode_entity(std::string_view s) {
  const auto semi = s.find(';');
  if (semi == std::string_view::npos || semi < 2 || semi > 12) return std::nullopt;
  std::string_view body = s.substr(1, semi - 1);
  if (body[0] == '#') {
    std::uint32_t cp = 0;
    std::string_view digits = body.substr(1);
    int base = 10;
    if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
      base = 16;
      digits.remove_prefix(1);
    }
    if (digits.empty()) return std::nullopt;
    for (char c : digits) {
      int v;
      if (c >= '0' && c <= '9') {
        v = c - '0';
      } else if (base == 16 && std::isxdigit(static_cast<unsigned char>(c))) {
        v = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      } else {
        return std::nullopt;
      }
      cp = cp * base + v;
      if (cp > 0x10FFFF) cp = 0x110000;
    }
    return std::make_pair(cp, semi + 1);
  }
  for (const auto& [name, cp] : kNamedEntities) {
    if (body == name) return std::make_pair(cp, semi + 1);
  }
  return std::nullopt;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '&') {
      if (auto e = decode_entity(s.substr(i))) {
        append_utf8(out, e->first);
        i += e->second;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

bool opens_markup(std::string_view s, std::size_t i) {
  return i + 1 < s.size() &&
         (is_alpha(s[i + 1]) || s[i + 1] == '/' || s[i + 1] == '!' || s[i + 1] == '?');
}

// Inverse of decode_entities for the characters the tokenizer would
// reinterpret: a '<' that opens markup, and a '&' that starts an entity.
std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '<' && opens_markup(s, i)) {
      out += "&lt;";
    } else if (s[i] == '&' && decode_entity(s.substr(i))) {
      out += "&amp;";
    } else {
      out += s[i];
    }
  }
  return out;
}

std::size_t skip_raw_text(std::string_view html, std::size_t pos, std::string_view name) {
  const std::string needle = "</" + std::string(name);
  while (pos < html.size()) {
    auto lt = html.find("</", pos);
    if (lt == std::string_view::npos) return html.size();
    if (lt + needle.size() <= html.size() &&
        lower(html.substr(lt, needle.size())) == needle) {
      auto gt = html.find('>', lt);
      return gt == std::string_view::npos ? html.size() : gt + 1;
    }
    pos = lt + 2;
  }
  return html.size();
}

// Parses the tag starting at html[pos] == '<'. Returns nullopt when the '<'
// does not start a tag (it is then literal text).
std::optional<Tag> parse_tag(std::string_view html, std::size_t& pos) {
  std::size_t i = pos + 1;
  Tag tag;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  if (i >= html.size() || !is_alpha(html[i])) return std::nullopt;
  const std::size_t name_start = i;
  while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) ||
                             html[i] == '-' || html[i] == ':'))
    ++i;
  tag.name = lower(html.substr(name_start, i - name_start));

  while (i < html.size() && html[i] != '>') {
    if (is_space(html[i])) {
      ++i;
      continue;
    }
    if (html[i] == '/') {
      if (i + 1 < html.size() && html[i + 1] == '>') tag.self_closing = true;
      ++i;
      continue;
    }
    const std::size_t key_start = i;
    while (i < html.size() && !is_space(html[i]) && html[i] != '=' && html[i] != '>' &&
           html[i] != '/')
      ++i;
    std::string key = lower(html.substr(key_start, i - key_start));
    while (i < html.size() && is_space(html[i])) ++i;
    std::string value;
    if (i < html.size() && html[i] == '=') {
      ++i;
      while (i < html.size() && is_space(html[i])) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        const char quote = html[i++];
        const std::size_t v_start = i;
        while (i < html.size() && html[i] != quote) ++i;
        value = decode_entities(html.substr(v_start, i - v_start));
        if (i < html.size()) ++i;
      } else {
        const std::size_t v_start = i;
        while (i < html.size() && !is_space(html[i]) && html[i] != '>') ++i;
        value = decode_entities(html.substr(v_start, i - v_start));
      }
    }
    if (!key.empty()) tag.attrs.emplace_back(std::move(key), std::move(value));
  }
  pos = i < html.size() ? i + 1 : html.size();
  return tag;
}

bool has_class(const Tag& tag, const std::vector<std::string>& classes) {
  if (classes.empty()) return false;
  std::istringstream tokens{std::string(tag.attr("class"))};
  std::string token;
  while (tokens >> token) {
    if (std::find(classes.begin(), classes.end(), token) != classes.end()) return true;
  }
  return false;
}

class Converter {
 public:
  explicit Converter(const CleanOptions& options) : options_(options) {}

  std::string run(std::string_view html) {
    std::size_t i = 0;
    while (i < html.size()) {
      if (html[i] != '<') {
        auto next = html.find('<', i + 1);
        if (next == std::string_view::npos) next = html.size();
        on_text(html.substr(i, next - i));
        i = next;
        continue;
      }
      if (html.compare(i, 4, "<!--") == 0) {
        auto end = html.find("-->", i + 4);
        i = end == std::string_view::npos ? html.size() : end + 3;
        continue;
      }
      if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
        auto end = html.find('>', i);
        i = end == std::string_view::npos ? html.size() : end + 1;
        continue;
      }
      std::size_t pos = i;
      auto tag = parse_tag(html, pos);
      if (!tag) {
        on_text(html.substr(i, 1));
        ++i;
        continue;
      }
      i = pos;
      if (tag->closing) {
        on_end(tag->name);
      } else if (kRawTextElements.contains(tag->name)) {
        if (!tag->self_closing) i = skip_raw_text(html, i, tag->name);
      } else {
        on_start(*tag);
      }
    }
    return finish();
  }

 private:
  struct Open {
    std::string name;
    bool kept = false;
    std::size_t mark = 0;
    std::string href;
  };

  bool emitting() const {
    return skip_depth_ == 0 && (options_.keep_classes.empty() || kept_depth_ > 0);
  }

  void line_break() {
    if (!out_.empty() && out_.back() != '\n') out_ += '\n';
  }

  void paragraph_break() {
    if (out_.empty()) return;
    line_break();
    if (out_.size() < 2 || out_[out_.size() - 2] != '\n') out_ += '\n';
  }

  void on_text(std::string_view raw) {
    if (!emitting()) return;
    std::string text = decode_entities(raw);
    if (pre_depth_ > 0) {
      if (pre_fresh_ && !text.empty() && text.front() == '\n') text.erase(0, 1);
      pre_fresh_ = false;
      out_ += escape_text(text);
      return;
    }
    if (!stack_.empty()) {
      // Inside markup, source line breaks are insignificant whitespace.
      std::string collapsed;
      collapsed.reserve(text.size());
      bool space = false;
      for (char c : text) {
        if (is_space(c)) {
          space = true;
          continue;
        }
        if (space) collapsed += ' ';
        space = false;
        collapsed += c;
      }
      if (space) collapsed += ' ';
      text = std::move(collapsed);
    }
    out_ += escape_text(text);
  }

  void on_start(const Tag& tag) {
    if (skip_depth_ > 0) {
      if (tag.name == skip_name_ && !tag.self_closing && !kVoidElements.contains(tag.name))
        ++skip_depth_;
      return;
    }
    const bool removed = kRemovedElements.contains(tag.name) ||
                         kRemovedRoles.contains(lower(tag.attr("role"))) ||
                         has_class(tag, options_.drop_classes) ||
                         tag.attr("aria-hidden") == "true";
    const bool is_void = kVoidElements.contains(tag.name) || tag.self_closing;
    if (removed) {
      if (!is_void) {
        skip_name_ = tag.name;
        skip_depth_ = 1;
      }
      return;
    }
    if (is_void) {
      if (!emitting()) return;
      if (tag.name == "br") line_break();
      if (tag.name == "hr") {
        paragraph_break();
        out_ += "---";
        paragraph_break();
      }
      return;
    }

    Open open{tag.name, has_class(tag, options_.keep_classes), 0, {}};
    if (open.kept) ++kept_depth_;
    if (emitting()) open_markers(tag, open);
    stack_.push_back(std::move(open));
  }

  void open_markers(const Tag& tag, Open& open) {
    const std::string& name = tag.name;
    if (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6') {
      paragraph_break();
      out_.append(static_cast<std::size_t>(name[1] - '0'), '#');
      out_ += ' ';
    } else if (name == "pre") {
      paragraph_break();
      out_ += "```\n";
      ++pre_depth_;
      pre_fresh_ = true;
    } else if (name == "code") {
      if (pre_depth_ == 0) out_ += '`';
    } else if (name == "li") {
      line_break();
      if (!lists_.empty() && lists_.back().first) {
        out_ += std::to_string(++lists_.back().second) + ". ";
      } else {
        out_ += "- ";
      }
    } else if (name == "a") {
      open.mark = out_.size();
      open.href = std::string(tag.attr("href"));
    } else if (name == "td" || name == "th") {
      if (!out_.empty() && out_.back() != '\n') out_ += " | ";
    } else if (name == "tr" || name == "dt" || name == "dd") {
      line_break();
    }
    if (name == "ul" || name == "ol") lists_.emplace_back(name == "ol", 0);
    if (kParagraphElements.contains(name)) paragraph_break();
  }

  void close_markers(Open& open) {
    const std::string& name = open.name;
    if (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6') {
      paragraph_break();
    } else if (name == "pre") {
      if (pre_depth_ > 0) --pre_depth_;
      line_break();
      out_ += "```";
      paragraph_break();
    } else if (name == "code") {
      if (pre_depth_ == 0) out_ += '`';
    } else if (name == "a") {
      finish_link(open);
    } else if (name == "tr" || name == "li" || name == "dt" || name == "dd") {
      line_break();
    }
    if (name == "ul" || name == "ol") {
      if (!lists_.empty()) lists_.pop_back();
    }
    if (kParagraphElements.contains(name)) paragraph_break();
  }

  void finish_link(const Open& open) {
    if (open.mark > out_.size()) return;
    std::string inner = out_.substr(open.mark);
    std::replace(inner.begin(), inner.end(), '\n', ' ');
    const auto b = inner.find_first_not_of(' ');
    const auto e = inner.find_last_not_of(' ');
    inner = b == std::string::npos ? std::string{} : inner.substr(b, e - b + 1);
    std::string href = open.href;
    href.erase(std::remove_if(href.begin(), href.end(), is_space), href.end());
    const bool usable = !href.empty() && href[0] != '#' && !lower(href).starts_with("javascript:");
    out_.resize(open.mark);
    if (inner.empty()) return;
    if (usable) {
      out_ += "[" + inner + "](" + escape_text(href) + ")";
    } else {
      out_ += inner;
    }
  }

  void on_end(const std::string& name) {
    if (skip_depth_ > 0) {
      if (name == skip_name_ && --skip_depth_ == 0) skip_name_.clear();
      return;
    }
    auto it = std::find_if(stack_.rbegin(), stack_.rend(),
                           [&](const Open& o) { return o.name == name; });
    if (it == stack_.rend()) {
      if (emitting() && name == "p") paragraph_break();
      return;
    }
    const std::size_t keep = static_cast<std::size_t>(stack_.rend() - it) - 1;
    while (stack_.size() > keep) {
      Open open = std::move(stack_.back());
      stack_.pop_back();
      if (emitting()) close_markers(open);
      if (open.kept) --kept_depth_;
    }
  }

  std::string finish() {
    while (!stack_.empty()) {
      Open open = std::move(stack_.back());
      stack_.pop_back();
      if (emitting()) close_markers(open);
      if (open.kept) --kept_depth_;
    }
    return normalize(out_);
  }

  static bool is_fence(std::string_view line) { return line.starts_with("```"); }

  static bool is_empty_marker(std::string_view line) {
    if (line == "-") return true;
    if (!line.empty() && std::all_of(line.begin(), line.end(), [](char c) { return c == '#'; }))
      return line.size() <= 6;
    if (line.size() >= 2 && line.back() == '.' &&
        std::all_of(line.begin(), line.end() - 1,
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return true;
    return false;
  }

  // Line-level cleanup outside fenced blocks: collapse blanks, trim, and drop
  // blank-line runs and markers left without content.
  static std::string normalize(const std::string& text) {
    std::vector<std::string> lines;
    bool in_fence = false;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      start = end + 1;

      std::string squeezed;
      bool space = false;
      for (char c : line) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
          space = true;
          continue;
        }
        if (space && !squeezed.empty()) squeezed += ' ';
        space = false;
        squeezed += c;
      }

      if (in_fence) {
        if (is_fence(squeezed)) {
          in_fence = false;
          lines.push_back(squeezed);
        } else {
          lines.push_back(line);
        }
        continue;
      }
      if (is_fence(squeezed)) in_fence = true;
      if (is_empty_marker(squeezed)) squeezed.clear();
      if (squeezed.empty() && (lines.empty() || lines.back().empty())) continue;
      lines.push_back(std::move(squeezed));
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (k) out += '\n';
      out += lines[k];
    }
    return out;
  }

  const CleanOptions& options_;
  std::string out_;
  std::vector<Open> stack_;
  std::vector<std::pair<bool, int>> lists_;
  std::string skip_name_;
  int skip_depth_ = 0;
  int kept_depth_ = 0;
  int pre_depth_ = 0;
  bool pre_fresh_ = false;
};

}  // namespace

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

std::string truncate_with_marker(std::string text, std::size_t cap) {
  if (text.size() <= cap) return text;
  if (cap <= kTruncationMarker.size()) return std::string(kTruncationMarker.substr(0, cap));
  std::size_t cut = cap - kTruncationMarker.size();
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  text += kTruncationMarker;
  return text;
}

std::string clean_html(std::string_view html, const CleanOptions& options) {
  if (!is_valid_utf8(html)) throw ExtractionError("document is not valid UTF-8");
  Converter converter(options);
  return truncate_with_marker(converter.run(html), options.max_chars);
}

}  // namespace softid::content
