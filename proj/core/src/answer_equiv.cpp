// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tirforge/answer_equiv.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <regex>

#include "tirforge/error.hpp"

namespace tirforge {

void EquivConfig::validate() const {
  if (!std::isfinite(rel_tol) || rel_tol <= 0.0) {
    throw PreconditionError("rel_tol must be finite and > 0");
  }
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

// Replaces a LaTeX control word only where it is not the prefix of a longer
// command (\le must not eat \left).
void replace_command(std::string& s, std::string_view cmd, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(cmd, pos)) != std::string::npos;) {
    std::size_t end = pos + cmd.size();
    if (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) {
      pos = end;
      continue;
    }
    s.replace(pos, cmd.size(), to);
    pos += to.size();
  }
}

// Index of the brace closing the one at s[open], or npos.
std::size_t closing_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

// Reads one macro argument at s[i]: a braced group or a single character.
// Returns {content, index past the argument}.
std::optional<std::pair<std::string, std::size_t>> macro_arg(std::string_view s, std::size_t i) {
  while (i < s.size() && s[i] == ' ') ++i;
  if (i >= s.size()) return std::nullopt;
  if (s[i] == '{') {
    auto close = closing_brace(s, i);
    if (close == std::string_view::npos) return std::nullopt;
    return std::pair{std::string(s.substr(i + 1, close - i - 1)), close + 1};
  }
  if (s[i] == '\\' || s[i] == '}') return std::nullopt;
  return std::pair{std::string(1, s[i]), i + 1};
}

template <class Fn>
void rewrite_macro(std::string& s, std::string_view macro, int nargs, Fn render) {
  for (std::size_t pos = s.find(macro); pos != std::string::npos; pos = s.find(macro, pos)) {
    std::size_t end = pos + macro.size();
    if (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) {
      pos = end;
      continue;
    }
    std::vector<std::string> args;
    std::size_t i = end;
    bool ok = true;
    for (int k = 0; k < nargs; ++k) {
      auto a = macro_arg(s, i);
      if (!a) {
        ok = false;
        break;
      }
      args.push_back(std::move(a->first));
      i = a->second;
    }
    if (!ok) {
      pos = end;
      continue;
    }
    std::string repl = render(args);
    s.replace(pos, i - pos, repl);
    pos += repl.size();
  }
}

bool is_simple_operand(std::string_view s, bool allow_sign) {
  if (s.empty()) return false;
  std::size_t i = (allow_sign && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isalnum(static_cast<unsigned char>(s[i])) && s[i] != '.') return false;
  }
  return true;
}

std::string group(const std::string& s, bool allow_sign) {
  return is_simple_operand(s, allow_sign) ? s : "(" + s + ")";
}

void strip_delimiters(std::string& s) {
  for (bool changed = true; changed;) {
    changed = false;
    s = trim(s);
    for (auto [open, close] : {std::pair{"$$", "$$"}, std::pair{"$", "$"},
                               std::pair{"\\(", "\\)"}, std::pair{"\\[", "\\]"}}) {
      std::string_view o(open), c(close);
      if (s.size() >= o.size() + c.size() && s.starts_with(o) && s.ends_with(c)) {
        s = s.substr(o.size(), s.size() - o.size() - c.size());
        changed = true;
        break;
      }
    }
  }
}

void strip_outer_braces(std::string& s) {
  while (s.size() >= 2 && s.front() == '{' && closing_brace(s, 0) == s.size() - 1) {
    s = s.substr(1, s.size() - 2);
  }
}

std::string normalize_once(std::string s, bool latex) {
  strip_delimiters(s);

  auto content = [](const std::vector<std::string>& a) { return a[0]; };
  for (std::string_view m : {"\\boxed", "\\fbox"}) rewrite_macro(s, m, 1, content);
  for (std::string_view m : {"\\text", "\\textbf", "\\textrm", "\\mathrm", "\\mathbf",
                             "\\operatorname", "\\mbox"}) {
    rewrite_macro(s, m, 1, content);
  }

  replace_all(s, "{,}", "");
  for (std::string_view sp : {"\\!", "\\,", "\\;", "\\:", "\\ "}) replace_all(s, sp, "");
  replace_command(s, "\\left", "");
  replace_command(s, "\\right", "");

  if (latex) {
    replace_command(s, "\\dfrac", "\\frac");
    replace_command(s, "\\tfrac", "\\frac");
    rewrite_macro(s, "\\frac", 2, [](const std::vector<std::string>& a) {
      return group(trim(a[0]), true) + "/" + group(trim(a[1]), false);
    });
    rewrite_macro(s, "\\sqrt", 1,
                  [](const std::vector<std::string>& a) { return "sqrt(" + trim(a[0]) + ")"; });
    replace_all(s, "^\\circ", "");
    replace_all(s, "^{\\circ}", "");
    replace_all(s, "°", "");
    replace_command(s, "\\circ", "");
    replace_command(s, "\\degree", "");
    replace_command(s, "\\pi", "pi");
    replace_command(s, "\\cdot", "*");
    replace_command(s, "\\times", "*");
    replace_command(s, "\\infty", "inf");
    replace_command(s, "\\leq", "<=");
    replace_command(s, "\\le", "<=");
    replace_command(s, "\\geq", ">=");
    replace_command(s, "\\ge", ">=");
    replace_command(s, "\\neq", "!=");
    replace_all(s, "\\%", "%");
    for (std::size_t pos = s.find("^{"); pos != std::string::npos; pos = s.find("^{", pos + 1)) {
      auto close = closing_brace(s, pos + 1);
      if (close == std::string::npos) break;
      std::string inner = trim(s.substr(pos + 2, close - pos - 2));
      std::string repl = "^" + group(inner, false);
      s.replace(pos, close - pos + 1, repl);
    }
  }

  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c) != 0; }),
          s.end());

  static const std::regex kThousands(R"(^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$)");
  if (std::regex_match(s, kThousands)) replace_all(s, ",", "");

  while (!s.empty() && s.back() == '.') s.pop_back();
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  strip_outer_braces(s);
  return s;
}

// Decimal literal -> exact rational. Exponents are bounded so hostile input
// cannot request astronomically large integers.
std::optional<mpq_class> parse_decimal(const std::string& s) {
  static const std::regex kDecimal(R"(^([+-]?)(\d*)(?:\.(\d*))?(?:e([+-]?\d{1,4}))?$)");
  std::smatch m;
  if (!std::regex_match(s, m, kDecimal)) return std::nullopt;
  std::string int_part = m[2].str();
  std::string frac_part = m[3].str();
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  long exponent = m[4].matched ? std::stol(m[4].str()) : 0;
  if (exponent > 4000 || exponent < -4000) return std::nullopt;

  mpz_class digits(int_part + frac_part == "" ? "0" : int_part + frac_part, 10);
  mpz_class ten_pow;
  long scale = exponent - static_cast<long>(frac_part.size());
  mpq_class value;
  if (scale >= 0) {
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(scale));
    value = mpq_class(digits * ten_pow);
  } else {
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(-scale));
    value = mpq_class(digits, ten_pow);
    value.canonicalize();
  }
  if (m[1].str() == "-") value = -value;
  return value;
}

struct Numeric {
  mpq_class value;
  bool decimal;  // plain decimal literal (no fraction bar)
};

std::optional<Numeric> parse_numeric(const std::string& s) {
  if (auto d = parse_decimal(s)) return Numeric{*d, true};
  auto slash = s.find('/');
  if (slash == std::string::npos || s.find('/', slash + 1) != std::string::npos) {
    return std::nullopt;
  }
  auto unparen = [](std::string t) {
    if (t.size() >= 2 && t.front() == '(' && t.back() == ')') t = t.substr(1, t.size() - 2);
    return t;
  };
  auto num = parse_decimal(unparen(s.substr(0, slash)));
  auto den = parse_decimal(unparen(s.substr(slash + 1)));
  if (!num || !den || *den == 0) return std::nullopt;
  mpq_class q = *num / *den;
  q.canonicalize();
  return Numeric{q, false};
}

}  // namespace

std::string normalize_answer(std::string_view text, bool normalize_latex) {
  std::string current(text);
  // Each pass can expose another wrapper; iterate to a fixed point.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = normalize_once(current, normalize_latex);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

bool answers_equivalent(std::string_view pred, std::string_view gold, const EquivConfig& cfg) {
  std::string p = normalize_answer(pred, cfg.normalize_latex);
  std::string g = normalize_answer(gold, cfg.normalize_latex);
  auto pn = parse_numeric(p);
  auto gn = parse_numeric(g);
  if (cfg.integer_mode) {
    return pn && gn && pn->value.get_den() == 1 && gn->value.get_den() == 1 &&
           pn->value == gn->value;
  }
  if (p == g) return true;
  if (!pn || !gn) return false;

  if (pn->value == gn->value) return true;
  if (!(pn->decimal && gn->decimal)) return false;

  // Scale by the larger magnitude so the relation stays symmetric.
  const mpq_class abs_p = abs(pn->value);
  const mpq_class abs_g = abs(gn->value);
  mpq_class scale = std::max({mpq_class(1), abs_p, abs_g});
  mpq_class diff = abs(pn->value - gn->value);
  return diff <= mpq_class(cfg.rel_tol) * scale;
}

}  // namespace tirforge
