#include "sparsetc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "sparsetc/error.hpp"

namespace sparsetc {

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Assign, Plus, Star, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    Tok kind;
    switch (c) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ',': kind = Tok::Comma; break;
      case '=': kind = Tok::Assign; break;
      case '+': kind = Tok::Plus; break;
      case '*': kind = Tok::Star; break;
      default:
        throw ParseError("unexpected character '" + std::string(1, c) + "' at offset " +
                         std::to_string(i));
    }
    out.push_back({kind, std::string(1, c), i});
    ++i;
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, const Bindings& bindings)
      : tokens_(tokenize(src)), bindings_(bindings) {}

  TensorExpr assignment() {
    Access out = access_head();
    expect(Tok::Assign, "'='");
    Expr rhs = sum();
    expect(Tok::End, "end of input");
    return make_assignment(std::move(out), std::move(rhs));
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  const Token& expect(Tok kind, const char* what) {
    const Token& t = tokens_[pos_];
    if (t.kind != kind)
      throw ParseError(std::string("expected ") + what + " at offset " + std::to_string(t.offset) +
                       (t.text.empty() ? "" : " near '" + t.text + "'"));
    ++pos_;
    return t;
  }

  Access access_head() {
    Access a;
    a.name = expect(Tok::Ident, "tensor name").text;
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      a.indices.push_back({expect(Tok::Ident, "index variable").text});
      while (peek().kind == Tok::Comma) {
        ++pos_;
        a.indices.push_back({expect(Tok::Ident, "index variable").text});
      }
    }
    expect(Tok::RParen, "')'");
    return a;
  }

  Expr sum() {
    Expr e = product();
    while (peek().kind == Tok::Plus) {
      ++pos_;
      e = make_add(std::move(e), product());
    }
    return e;
  }

  Expr product() {
    Expr e = factor();
    while (peek().kind == Tok::Star) {
      ++pos_;
      e = make_mul(std::move(e), factor());
    }
    return e;
  }

  Expr factor() {
    if (peek().kind == Tok::LParen) {
      ++pos_;
      Expr e = sum();
      expect(Tok::RParen, "')'");
      return e;
    }
    Access a = access_head();
    auto it = bindings_.find(a.name);
    if (it == bindings_.end()) throw ParseError("unbound tensor name '" + a.name + "'");
    return make_access(a.name, it->second, std::move(a.indices));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Bindings& bindings_;
};

}  // namespace

TensorExpr parse(std::string_view src, const Bindings& bindings) {
  return Parser(src, bindings).assignment();
}

bool is_einsum(std::string_view src) {
  return src.find('=') == std::string_view::npos || src.find("->") != std::string_view::npos;
}

TensorExpr parse_einsum(std::string_view spec, const std::vector<std::string>& operands,
                        const Bindings& bindings, std::string output_name) {
  std::string s;
  for (char c : spec)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  const auto arrow = s.find("->");
  const std::string lhs = s.substr(0, arrow);

  std::vector<std::string> terms;
  std::size_t start = 0;
  for (;;) {
    const auto comma = lhs.find(',', start);
    terms.push_back(lhs.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (terms.size() != operands.size())
    throw ParseError("einsum has " + std::to_string(terms.size()) + " operands but " +
                     std::to_string(operands.size()) + " tensors were given");

  auto letters = [](const std::string& t) {
    IndexVars vars;
    for (char c : t) {
      if (!std::isalpha(static_cast<unsigned char>(c)))
        throw ParseError("einsum subscripts must be letters, got '" + std::string(1, c) + "'");
      vars.push_back({std::string(1, c)});
    }
    return vars;
  };

  Expr rhs;
  std::map<char, int> uses;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    auto it = bindings.find(operands[k]);
    if (it == bindings.end()) throw ParseError("unbound tensor name '" + operands[k] + "'");
    Expr a = make_access(operands[k], it->second, letters(terms[k]));
    for (char c : terms[k]) ++uses[c];
    rhs = rhs ? make_mul(std::move(rhs), std::move(a)) : std::move(a);
  }

  Access out;
  out.name = std::move(output_name);
  if (arrow != std::string::npos) {
    out.indices = letters(s.substr(arrow + 2));
  } else {
    for (const auto& [c, n] : uses)
      if (n == 1) out.indices.push_back({std::string(1, c)});
  }
  return make_assignment(std::move(out), std::move(rhs));
}

}  // namespace sparsetc
