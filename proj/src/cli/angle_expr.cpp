// Copyright 2026 The weakcrit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weakcrit/cli/angle_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace weakcrit::cli {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  double parse() {
    const double value = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    if (!std::isfinite(value)) fail("value is not finite");
    return value;
  }

 private:
  double expression() {
    double value = term();
    for (;;) {
      skip_space();
      if (accept('+')) value += term();
      else if (accept('-')) value -= term();
      else return value;
    }
  }

  double term() {
    double value = factor();
    for (;;) {
      skip_space();
      if (accept('*')) {
        value *= factor();
      } else if (accept('/')) {
        const double divisor = factor();
        if (divisor == 0.0) fail("division by zero");
        value /= divisor;
      } else if (starts_with_pi()) {
        value *= factor();  // implicit product, as in 2pi
      } else {
        return value;
      }
    }
  }

  double factor() {
    skip_space();
    if (accept('-')) return -factor();
    if (accept('+')) return factor();
    if (accept('(')) {
      const double value = expression();
      skip_space();
      if (!accept(')')) fail("missing ')'");
      return value;
    }
    if (starts_with_pi()) {
      pos_ += 2;
      return std::numbers::pi;
    }
    return number();
  }

  double number() {
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("expected a number or 'pi'");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  bool starts_with_pi() const { return text_.substr(pos_, 2) == "pi"; }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const char* what) const {
    throw UsageError("cannot parse angle '" + std::string(text_) + "': " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

double parse_angle(std::string_view text) {
  if (text.empty()) throw UsageError("empty angle expression");
  return Parser(text).parse();
}

}  // namespace weakcrit::cli
