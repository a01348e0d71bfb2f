#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "agentlint/error.hpp"
#include "agentlint/text.hpp"

namespace agentlint::py {

enum class TokKind { Name, Number, String, Op, Newline, Indent, Dedent, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string_view text;  // raw source bytes (whole literal for strings)
  std::size_t begin = 0;
  std::size_t end = 0;
  // String tokens only
  std::string_view prefix;
  std::size_t body_begin = 0;
  std::size_t body_end = 0;
  bool raw = false;
  bool fstring = false;
  bool bytes = false;
};

namespace detail {

inline bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
inline bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

inline constexpr std::array<std::string_view, 25> kOperators{
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=",
    "==",  "!=",  "+=",  "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "@=", "<>"};
inline constexpr std::string_view kSingleOps = "()[]{},:.;@=+-*/%&|^~<>!";

}  // namespace detail

// Decodes backslash escapes of a non-raw string body. Unknown escapes are
// kept verbatim, matching the language's behavior.
inline std::string decode_escapes(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out.push_back(c);
      continue;
    }
    char n = body[++i];
    switch (n) {
      case '\n': break;  // line continuation
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      case '\'': out.push_back('\''); break;
      case '"': out.push_back('"'); break;
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'v': out.push_back('\v'); break;
      case '0': out.push_back('\0'); break;
      case 'x':
        if (i + 2 < body.size() && std::isxdigit(static_cast<unsigned char>(body[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(body[i + 2]))) {
          out.push_back(static_cast<char>(std::stoi(std::string(body.substr(i + 1, 2)), nullptr, 16)));
          i += 2;
        } else {
          out += "\\x";
        }
        break;
      case 'u':
      case 'U': {
        const std::size_t len = n == 'u' ? 4 : 8;
        bool ok = true;
        for (std::size_t k = 1; ok && k <= len; ++k) {
          ok = i + k < body.size() && std::isxdigit(static_cast<unsigned char>(body[i + k]));
        }
        if (!ok) {
          out.push_back('\\');
          out.push_back(n);
          break;
        }
        auto cp = static_cast<std::uint32_t>(std::stoul(std::string(body.substr(i + 1, len)), nullptr, 16));
        i += len;
        if (cp < 0x80) {
          out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
          out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
          out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
          out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
          out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
          out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
          out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
          out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
          out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
          out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        break;
      }
      default:
        out.push_back('\\');
        out.push_back(n);
    }
  }
  return out;
}

class Tokenizer {
 public:
  // Tokenizes text[begin, end). In expression mode no NEWLINE/INDENT/DEDENT
  // tokens are produced (used for f-string replacement fields).
  Tokenizer(std::string_view text, std::string file, const text::LineIndex& lines, std::size_t begin,
            std::size_t end, bool expression_mode = false)
      : src_(text), file_(std::move(file)), lines_(lines), pos_(begin), end_(end), expr_mode_(expression_mode) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool at_line_start = !expr_mode_;
    while (true) {
      if (at_line_start) {
        at_line_start = false;
        if (!handle_indentation(out)) break;
      }
      skip_inline_space();
      if (pos_ >= end_) break;
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (c == '#') {
        while (pos_ < end_ && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\\' && pos_ + 1 < end_ && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
        pos_ += src_[pos_ + 1] == '\r' && pos_ + 2 < end_ && src_[pos_ + 2] == '\n' ? 3 : 2;
        continue;
      }
      if (c == '\n' || c == '\r') {
        const auto nl = pos_;
        pos_ += (c == '\r' && pos_ + 1 < end_ && src_[pos_ + 1] == '\n') ? 2 : 1;
        if (brackets_.empty() && !expr_mode_) {
          if (!out.empty() && out.back().kind != TokKind::Newline && out.back().kind != TokKind::Indent &&
              out.back().kind != TokKind::Dedent) {
            out.push_back(make(TokKind::Newline, nl, nl + 1));
          }
          at_line_start = true;
        }
        continue;
      }
      if (string_start()) {
        out.push_back(lex_string());
        continue;
      }
      if (detail::ident_start(c)) {
        const auto b = pos_;
        while (pos_ < end_ && detail::ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        out.push_back(make(TokKind::Name, b, pos_));
        continue;
      }
      if (std::isdigit(c) || (c == '.' && pos_ + 1 < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        out.push_back(lex_number());
        continue;
      }
      out.push_back(lex_operator());
    }
    if (!brackets_.empty()) {
      throw SyntaxError(file_, lines_.line_of(brackets_.back().second),
                        std::string("'") + brackets_.back().first + "' was never closed");
    }
    if (!expr_mode_) {
      if (!out.empty() && out.back().kind != TokKind::Newline && out.back().kind != TokKind::Dedent) {
        out.push_back(make(TokKind::Newline, end_, end_));
      }
      while (indents_.size() > 1) {
        indents_.pop_back();
        out.push_back(make(TokKind::Dedent, end_, end_));
      }
    }
    out.push_back(make(TokKind::End, end_, end_));
    return out;
  }

 private:
  Token make(TokKind k, std::size_t b, std::size_t e) const {
    Token t;
    t.kind = k;
    t.begin = b;
    t.end = e;
    t.text = src_.substr(b, e - b);
    return t;
  }

  void skip_inline_space() {
    while (pos_ < end_ && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) ++pos_;
  }

  // Measures indentation of the next non-blank line; emits INDENT/DEDENT.
  // Returns false at end of input.
  bool handle_indentation(std::vector<Token>& out) {
    while (pos_ < end_) {
      std::size_t col = 0;
      const auto line_begin = pos_;
      while (pos_ < end_) {
        const char c = src_[pos_];
        if (c == ' ') ++col;
        else if (c == '\t') col = (col / 8 + 1) * 8;
        else if (c == '\f') col = 0;
        else break;
        ++pos_;
      }
      if (pos_ >= end_) return false;
      const char c = src_[pos_];
      if (c == '#' || c == '\n' || c == '\r') {
        while (pos_ < end_ && src_[pos_] != '\n') ++pos_;
        if (pos_ < end_) ++pos_;
        continue;
      }
      if (c == '\\' && pos_ + 1 < end_ && src_[pos_ + 1] == '\n') {
        // a backslash continuation on an otherwise empty line
        pos_ += 2;
        continue;
      }
      if (col > indents_.back()) {
        indents_.push_back(col);
        out.push_back(make(TokKind::Indent, line_begin, pos_));
      } else {
        while (col < indents_.back()) {
          indents_.pop_back();
          out.push_back(make(TokKind::Dedent, pos_, pos_));
        }
        if (col != indents_.back()) {
          throw SyntaxError(file_, lines_.line_of(pos_), "unindent does not match any outer indentation level");
        }
      }
      return true;
    }
    return false;
  }

  bool string_start() const {
    std::size_t p = pos_;
    std::size_t n = 0;
    while (p < end_ && n < 3 && std::string_view("rRbBuUfF").find(src_[p]) != std::string_view::npos) {
      ++p;
      ++n;
    }
    if (p >= end_) return false;
    if (src_[p] != '"' && src_[p] != '\'') return false;
    // validate prefix combination
    std::string pre = text::to_lower(src_.substr(pos_, n));
    static constexpr std::array<std::string_view, 12> ok{"", "r", "u", "b", "f", "br", "rb", "fr", "rf", "ur"};
    for (auto v : ok) {
      if (pre == v) return true;
    }
    return false;
  }

  Token lex_string() {
    const auto b = pos_;
    while (src_[pos_] != '"' && src_[pos_] != '\'') ++pos_;
    const auto prefix = src_.substr(b, pos_ - b);
    const char q = src_[pos_];
    const bool triple = pos_ + 2 < end_ && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
    const std::size_t qlen = triple ? 3 : 1;
    pos_ += qlen;
    const auto body_begin = pos_;
    while (true) {
      if (pos_ >= end_) throw SyntaxError(file_, lines_.line_of(b), "unterminated string literal");
      const char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (!triple && c == '\n') throw SyntaxError(file_, lines_.line_of(b), "unterminated string literal");
      if (c == q && (!triple || (pos_ + 2 < end_ && src_[pos_ + 1] == q && src_[pos_ + 2] == q))) break;
      ++pos_;
    }
    const auto body_end = pos_;
    pos_ += qlen;
    Token t = make(TokKind::String, b, pos_);
    t.prefix = prefix;
    t.body_begin = body_begin;
    t.body_end = body_end;
    const auto lp = text::to_lower(prefix);
    t.raw = lp.find('r') != std::string::npos;
    t.fstring = lp.find('f') != std::string::npos;
    t.bytes = lp.find('b') != std::string::npos;
    return t;
  }

  Token lex_number() {
    const auto b = pos_;
    auto is_num_char = [&](std::size_t p) {
      const auto c = static_cast<unsigned char>(src_[p]);
      if (std::isalnum(c) || c == '_' || c == '.') return true;
      // exponent sign
      if ((c == '+' || c == '-') && p > b) {
        const char prev = src_[p - 1];
        const bool hex = src_.substr(b, 2) == "0x" || src_.substr(b, 2) == "0X";
        return !hex && (prev == 'e' || prev == 'E');
      }
      return false;
    };
    while (pos_ < end_ && is_num_char(pos_)) ++pos_;
    return make(TokKind::Number, b, pos_);
  }

  Token lex_operator() {
    const auto b = pos_;
    for (auto op : detail::kOperators) {
      if (pos_ + op.size() <= end_ && src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        return make(TokKind::Op, b, pos_);
      }
    }
    const char c = src_[pos_];
    if (detail::kSingleOps.find(c) == std::string_view::npos) {
      throw SyntaxError(file_, lines_.line_of(pos_), std::string("invalid character '") + c + "'");
    }
    ++pos_;
    track_bracket(src_.substr(b, 1));
    return make(TokKind::Op, b, pos_);
  }

  void track_bracket(std::string_view op) {
    if (op.size() != 1) return;
    const char c = op[0];
    if (c == '(' || c == '[' || c == '{') {
      brackets_.emplace_back(c, pos_ - 1);
    } else if (c == ')' || c == ']' || c == '}') {
      const char want = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (brackets_.empty() || brackets_.back().first != want) {
        throw SyntaxError(file_, lines_.line_of(pos_ - 1), std::string("unmatched '") + c + "'");
      }
      brackets_.pop_back();
    }
  }

  std::string_view src_;
  std::string file_;
  const text::LineIndex& lines_;
  std::size_t pos_;
  std::size_t end_;
  bool expr_mode_;
  std::vector<std::size_t> indents_{0};
  std::vector<std::pair<char, std::size_t>> brackets_;
};

}  // namespace agentlint::py
