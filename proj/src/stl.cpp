#include "tlsf/stl.hpp"

#include <cctype>
#include <cmath>
#include <fmt/format.h>

#include "tlsf/error.hpp"

namespace tlsf {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : ValidationError(fmt::format("{}:{}: {}", line, column, what)), line_(line), column_(column) {}

Predicate Predicate::lower(std::string name, std::string channel, double lb) {
  return {std::move(name), std::move(channel), MarginKind::kLower, lb, 0.0, 0.0};
}

Predicate Predicate::upper(std::string name, std::string channel, double ub) {
  return {std::move(name), std::move(channel), MarginKind::kUpper, 0.0, ub, 0.0};
}

Predicate Predicate::band(std::string name, std::string channel, double lb, double ub) {
  Predicate p{std::move(name), std::move(channel), MarginKind::kBand, lb, ub, 0.0};
  p.validate();
  return p;
}

Predicate Predicate::threshold(std::string name, std::string channel, double c) {
  return {std::move(name), std::move(channel), MarginKind::kThreshold, 0.0, 0.0, c};
}

double Predicate::margin(double x) const noexcept {
  switch (kind) {
    case MarginKind::kLower:
      return x - lb;
    case MarginKind::kUpper:
      return ub - x;
    case MarginKind::kBand:
      return (ub - lb) / 2.0 - std::abs(x - (ub + lb) / 2.0);
    case MarginKind::kThreshold:
      return limit - std::abs(x);
  }
  return 0.0;
}

void Predicate::validate() const {
  if (name.empty()) throw ValidationError("predicate without a name");
  if (channel.empty()) throw ValidationError("predicate '" + name + "' has no channel");
  if (!std::isfinite(lb) || !std::isfinite(ub) || !std::isfinite(limit)) {
    throw ValidationError("predicate '" + name + "' has non-finite parameters");
  }
  if (kind == MarginKind::kBand && !(lb < ub)) {
    throw ValidationError(fmt::format("band predicate '{}' needs lb < ub (got {} .. {})", name, lb, ub));
  }
  // c - |x| with c < 0 can never hold
  if (kind == MarginKind::kThreshold && limit < 0.0) {
    throw ValidationError(fmt::format("threshold predicate '{}' needs a limit >= 0 (got {})", name, limit));
  }
}

Formula Formula::atom(Predicate p) {
  Formula f;
  f.op = Op::kPred;
  f.pred = std::move(p);
  return f;
}

Formula Formula::negation(Formula inner) {
  Formula f;
  f.op = Op::kNot;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::conjunction(std::vector<Formula> fs) {
  Formula f;
  f.op = Op::kAnd;
  f.children = std::move(fs);
  return f;
}

Formula Formula::disjunction(std::vector<Formula> fs) {
  Formula f;
  f.op = Op::kOr;
  f.children = std::move(fs);
  return f;
}

Formula Formula::globally(std::optional<Interval> i, Formula inner) {
  Formula f;
  f.op = Op::kGlobally;
  f.interval = i;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::eventually(std::optional<Interval> i, Formula inner) {
  Formula f;
  f.op = Op::kEventually;
  f.interval = i;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::until(Interval i, Formula lhs, Formula rhs) {
  Formula f;
  f.op = Op::kUntil;
  f.interval = i;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

namespace {

void check_interval(const Interval& i) {
  if (!std::isfinite(i.lo) || !std::isfinite(i.hi) || i.lo < 0.0 || i.lo > i.hi) {
    throw ValidationError(fmt::format("malformed interval [{}, {}]", i.lo, i.hi));
  }
}

}  // namespace

void Formula::validate() const {
  switch (op) {
    case Op::kPred:
      if (!children.empty()) throw ValidationError("predicate node with children");
      pred.validate();
      return;
    case Op::kNot:
      if (children.size() != 1) throw ValidationError("negation needs one operand");
      break;
    case Op::kAnd:
    case Op::kOr:
      if (children.size() < 2) throw ValidationError("and/or need at least two operands");
      break;
    case Op::kGlobally:
    case Op::kEventually:
      if (children.size() != 1) throw ValidationError("F/G need one operand");
      if (interval) check_interval(*interval);
      break;
    case Op::kUntil:
      if (children.size() != 2) throw ValidationError("U needs two operands");
      if (!interval) throw ValidationError("U needs an interval");
      check_interval(*interval);
      break;
  }
  for (const auto& c : children) c.validate();
}

// ---------------------------------------------------------------------------
// Lexer / recursive-descent parser

namespace {

enum class Tok { kIdent, kNumber, kLBracket, kRBracket, kLParen, kRParen, kComma, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    auto single = [&](Tok k) {
      t.kind = k;
      t.text = std::string(1, c);
      advance();
      return t;
    };
    switch (c) {
      case '[': return single(Tok::kLBracket);
      case ']': return single(Tok::kRBracket);
      case '(': return single(Tok::kLParen);
      case ')': return single(Tok::kRParen);
      case ',': return single(Tok::kComma);
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        advance();
      }
      t.kind = Tok::kIdent;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      const std::size_t start = pos_;
      if (c == '-' || c == '+') advance();
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '.')) {
        advance();
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
      t.text = std::string(src_.substr(start, pos_ - start));
      std::size_t used = 0;
      try {
        t.number = std::stod(t.text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != t.text.size()) throw ParseError("invalid number '" + t.text + "'", t.line, t.column);
      t.kind = Tok::kNumber;
      return t;
    }
    throw ParseError(fmt::format("unexpected character '{}'", c), t.line, t.column);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_keyword(const std::string& s) {
  return s == "and" || s == "or" || s == "not" || s == "F" || s == "G" || s == "U";
}

class Parser {
 public:
  Parser(std::string_view text, const PredicateTable& preds, const FormulaTable* aliases)
      : lex_(text), preds_(preds), aliases_(aliases) {
    cur_ = lex_.next();
  }

  Formula parse() {
    Formula f = parse_or();
    if (cur_.kind != Tok::kEnd) fail("unexpected '" + cur_.text + "' after formula");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur_.line, cur_.column); }

  bool at_ident(std::string_view word) const { return cur_.kind == Tok::kIdent && cur_.text == word; }

  void expect(Tok k, std::string_view what) {
    if (cur_.kind != k) {
      fail(fmt::format("expected {} but found '{}'", what, cur_.kind == Tok::kEnd ? "end of input" : cur_.text));
    }
    cur_ = lex_.next();
  }

  Formula parse_or() {
    std::vector<Formula> parts;
    parts.push_back(parse_and());
    while (at_ident("or")) {
      cur_ = lex_.next();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Formula::disjunction(std::move(parts));
  }

  Formula parse_and() {
    std::vector<Formula> parts;
    parts.push_back(parse_unary());
    while (at_ident("and")) {
      cur_ = lex_.next();
      parts.push_back(parse_unary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Formula::conjunction(std::move(parts));
  }

  Formula parse_unary() {
    if (at_ident("not")) {
      cur_ = lex_.next();
      return Formula::negation(parse_unary());
    }
    if (at_ident("F") || at_ident("G")) {
      const bool eventually = cur_.text == "F";
      cur_ = lex_.next();
      std::optional<Interval> iv;
      if (cur_.kind == Tok::kLBracket) iv = parse_interval();
      expect(Tok::kLParen, "'('");
      Formula inner = parse_or();
      expect(Tok::kRParen, "')'");
      return eventually ? Formula::eventually(iv, std::move(inner))
                        : Formula::globally(iv, std::move(inner));
    }
    if (at_ident("U")) {
      cur_ = lex_.next();
      if (cur_.kind != Tok::kLBracket) fail("U requires an interval");
      const Interval iv = parse_interval();
      expect(Tok::kLParen, "'('");
      Formula lhs = parse_or();
      expect(Tok::kComma, "','");
      Formula rhs = parse_or();
      expect(Tok::kRParen, "')'");
      return Formula::until(iv, std::move(lhs), std::move(rhs));
    }
    return parse_atom();
  }

  Interval parse_interval() {
    const Token open = cur_;
    expect(Tok::kLBracket, "'['");
    const double lo = parse_number();
    expect(Tok::kComma, "','");
    const double hi = parse_number();
    expect(Tok::kRBracket, "']'");
    if (lo < 0.0 || hi < 0.0) throw ParseError("malformed interval: negative bound", open.line, open.column);
    if (lo > hi) {
      throw ParseError(fmt::format("malformed interval: [{}, {}] has lower > upper", lo, hi), open.line,
                       open.column);
    }
    return {lo, hi};
  }

  double parse_number() {
    if (cur_.kind != Tok::kNumber) fail("expected a number");
    const double v = cur_.number;
    cur_ = lex_.next();
    return v;
  }

  Formula parse_atom() {
    if (cur_.kind == Tok::kLParen) {
      cur_ = lex_.next();
      Formula f = parse_or();
      expect(Tok::kRParen, "')'");
      return f;
    }
    if (cur_.kind != Tok::kIdent || is_keyword(cur_.text)) {
      fail(cur_.kind == Tok::kEnd ? "unexpected end of input" : "unexpected '" + cur_.text + "'");
    }
    const std::string name = cur_.text;
    if (auto it = preds_.find(name); it != preds_.end()) {
      cur_ = lex_.next();
      Predicate p = it->second;
      p.name = name;
      return Formula::atom(std::move(p));
    }
    if (aliases_ != nullptr) {
      if (auto it = aliases_->find(name); it != aliases_->end()) {
        cur_ = lex_.next();
        return it->second;
      }
    }
    fail("unknown predicate '" + name + "'");
  }

  Lexer lex_;
  const PredicateTable& preds_;
  const FormulaTable* aliases_;
  Token cur_;
};

}  // namespace

Formula parse_stl(std::string_view text, const PredicateTable& predicates) {
  return Parser(text, predicates, nullptr).parse();
}

Formula parse_stl(std::string_view text, const PredicateTable& predicates, const FormulaTable& aliases) {
  return Parser(text, predicates, &aliases).parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

void print(const Formula& f, std::string& out);

void print_interval(const std::optional<Interval>& iv, std::string& out) {
  if (iv) out += fmt::format("[{},{}]", iv->lo, iv->hi);
}

// Children of and/or that would re-associate (or bind looser) get parentheses.
void print_operand(const Formula& parent, const Formula& child, std::string& out) {
  const bool wrap = (child.op == Op::kAnd || child.op == Op::kOr) &&
                    (parent.op == Op::kNot || child.op == parent.op || child.op == Op::kOr);
  if (wrap) out += '(';
  print(child, out);
  if (wrap) out += ')';
}

void print(const Formula& f, std::string& out) {
  switch (f.op) {
    case Op::kPred:
      out += f.pred.name;
      return;
    case Op::kNot:
      out += "not ";
      print_operand(f, f.children[0], out);
      return;
    case Op::kAnd:
    case Op::kOr: {
      const char* sep = f.op == Op::kAnd ? " and " : " or ";
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i > 0) out += sep;
        const Formula& c = f.children[i];
        const bool wrap = c.op == f.op || (f.op == Op::kAnd && c.op == Op::kOr);
        if (wrap) out += '(';
        print(c, out);
        if (wrap) out += ')';
      }
      return;
    }
    case Op::kGlobally:
    case Op::kEventually:
      out += f.op == Op::kGlobally ? "G" : "F";
      print_interval(f.interval, out);
      out += '(';
      print(f.children[0], out);
      out += ')';
      return;
    case Op::kUntil:
      out += "U";
      print_interval(f.interval, out);
      out += '(';
      print(f.children[0], out);
      out += ", ";
      print(f.children[1], out);
      out += ')';
      return;
  }
}

void collect(const Formula& f, std::vector<Predicate>& out) {
  if (f.op == Op::kPred) {
    for (const auto& p : out) {
      if (p.name == f.pred.name) return;
    }
    out.push_back(f.pred);
    return;
  }
  for (const auto& c : f.children) collect(c, out);
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::vector<Predicate> predicates_of(const Formula& f) {
  std::vector<Predicate> out;
  collect(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Signal

void Signal::add_channel(std::string name, std::vector<double> values) {
  if (channels_.count(name) != 0) throw ValidationError("duplicate channel '" + name + "'");
  order_.push_back(name);
  channels_.emplace(std::move(name), std::move(values));
}

std::size_t Signal::size() const noexcept {
  return channels_.empty() ? 0 : channels_.begin()->second.size();
}

bool Signal::has_channel(std::string_view name) const { return channels_.find(name) != channels_.end(); }

const std::vector<double>& Signal::channel(std::string_view name) const {
  auto it = channels_.find(name);
  if (it == channels_.end()) throw ValidationError(fmt::format("signal has no channel '{}'", name));
  return it->second;
}

void Signal::validate() const {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ValidationError("signal sampling period must be > 0");
  if (channels_.empty()) throw ValidationError("signal has no channels");
  const std::size_t n = size();
  if (n == 0) throw ValidationError("signal has no samples");
  for (const auto& [name, values] : channels_) {
    if (values.size() != n) throw ValidationError("channel '" + name + "' length differs");
    for (double v : values) {
      if (!std::isfinite(v)) throw ValidationError("channel '" + name + "' has non-finite values");
    }
  }
}

// ---------------------------------------------------------------------------
// Regions

void RegionSpec::validate() const {
  if (!(x_lb < x_ub) || !(y_lb < y_ub) || !(z_lb < z_ub)) {
    throw ValidationError("region '" + name + "' needs lb < ub on every axis");
  }
}

Formula region_to_formula(const RegionSpec& r, const ChannelTriple& channels) {
  r.validate();
  const auto& [cx, cy, cz] = channels;
  if (cx.empty() || cy.empty() || cz.empty()) throw ValidationError("region '" + r.name + "': missing channel name");
  std::vector<Formula> parts;
  parts.push_back(Formula::atom(Predicate::band(r.name + "_x", cx, r.x_lb, r.x_ub)));
  parts.push_back(Formula::atom(Predicate::band(r.name + "_y", cy, r.y_lb, r.y_ub)));
  parts.push_back(Formula::atom(Predicate::band(r.name + "_z", cz, r.z_lb, r.z_ub)));
  return Formula::conjunction(std::move(parts));
}

// ---------------------------------------------------------------------------
// Discretization and boolean semantics

namespace {
// Absorbs representation error such as 0.3/0.1 = 2.9999999999999996.
constexpr double kGridSlack = 1e-9;
}  // namespace

std::optional<Window> discretize(const std::optional<Interval>& interval, std::size_t index,
                                 std::size_t last, double dt) noexcept {
  if (index > last) return std::nullopt;
  if (!interval) return Window{index, last};
  const double lo = std::ceil(interval->lo / dt - kGridSlack);
  const double hi = std::floor(interval->hi / dt + kGridSlack);
  const std::size_t first = index + static_cast<std::size_t>(std::max(lo, 0.0));
  if (first > last) return std::nullopt;
  const double hi_abs = static_cast<double>(index) + hi;
  const std::size_t stop = hi_abs >= static_cast<double>(last) ? last : static_cast<std::size_t>(hi_abs);
  if (first > stop) return std::nullopt;
  return Window{first, stop};
}

std::size_t time_to_index(const Signal& s, double t) {
  const double pos = t / s.dt();
  const double idx = std::round(pos);
  if (t < 0.0 || std::abs(pos - idx) > 1e-6 || idx > static_cast<double>(s.last_index())) {
    throw HorizonError(fmt::format("time {} is not a sample of the signal (dt = {}, {} samples)", t, s.dt(), s.size()));
  }
  return static_cast<std::size_t>(idx);
}

namespace {

bool sat_at(const Formula& f, const Signal& s, std::size_t i) {
  switch (f.op) {
    case Op::kPred:
      return f.pred.margin(s.channel(f.pred.channel)[i]) > 0.0;
    case Op::kNot:
      return !sat_at(f.children[0], s, i);
    case Op::kAnd:
      for (const auto& c : f.children) {
        if (!sat_at(c, s, i)) return false;
      }
      return true;
    case Op::kOr:
      for (const auto& c : f.children) {
        if (sat_at(c, s, i)) return true;
      }
      return false;
    default:
      break;
  }
  const auto w = discretize(f.interval, i, s.last_index(), s.dt());
  if (!w) throw HorizonError("temporal interval lies outside the signal horizon");
  if (f.op == Op::kGlobally) {
    for (std::size_t j = w->first; j <= w->last; ++j) {
      if (!sat_at(f.children[0], s, j)) return false;
    }
    return true;
  }
  if (f.op == Op::kEventually) {
    for (std::size_t j = w->first; j <= w->last; ++j) {
      if (sat_at(f.children[0], s, j)) return true;
    }
    return false;
  }
  // Until: some j in the window satisfies rhs and lhs holds on [i, j).
  for (std::size_t j = w->first; j <= w->last; ++j) {
    if (!sat_at(f.children[1], s, j)) continue;
    bool held = true;
    for (std::size_t m = i; m < j && held; ++m) held = sat_at(f.children[0], s, m);
    if (held) return true;
  }
  return false;
}

}  // namespace

bool sat_bool(const Formula& f, const Signal& s, double t) {
  s.validate();
  return sat_at(f, s, time_to_index(s, t));
}

}  // namespace tlsf
