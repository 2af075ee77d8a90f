#include "dai/sequence.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace dai {

Block make_split(double probe_phase, const TimingParams& timing) {
  return Block{SplitPulse{probe_phase}, timing.tau_pi2()};
}
Block make_shift(int direction, const TimingParams& timing) {
  return Block{Shift{direction}, timing.tau_shift};
}
Block make_pi(const TimingParams& timing) { return Block{PiPulse{}, timing.tau_pi}; }
Block make_idle(double duration) { return Block{Idle{}, duration}; }
Block make_accel_window(double accel, double duration) {
  return Block{AccelWindow{accel}, duration};
}

double Sequence::total_duration() const {
  double t = 0.0;
  for (const Block& b : blocks) t += b.duration;
  return t;
}

int Sequence::shift_count() const {
  int n = 0;
  for (const Block& b : blocks)
    if (std::holds_alternative<Shift>(b.op)) ++n;
  return n;
}

double Sequence::echo_time() const {
  double t = 0.0;
  for (const Block& b : blocks)
    if (std::holds_alternative<Idle>(b.op) || std::holds_alternative<AccelWindow>(b.op))
      t += b.duration;
  return t;
}

double Sequence::final_probe_phase() const {
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
    if (const auto* s = std::get_if<SplitPulse>(&it->op)) return s->probe_phase;
  return 0.0;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Microsecond text whose parse (value * 1e-6) reproduces `seconds` exactly.
// seconds/1e-6 can land one ulp off the original microsecond figure, so probe
// the neighbours.
static std::string format_us(double seconds) {
  const double mu0 = seconds / 1e-6;
  double cand[5] = {mu0, std::nextafter(mu0, HUGE_VAL), std::nextafter(mu0, -HUGE_VAL)};
  cand[3] = std::nextafter(cand[1], HUGE_VAL);
  cand[4] = std::nextafter(cand[2], -HUGE_VAL);
  for (double c : cand)
    if (from_us(c) == seconds) return format_double(c);
  return format_double(mu0);
}

// ---------------------------------------------------------------------------
// DSL

namespace {

struct Token {
  std::string text;
  int line;
  int column;
  int index;  // 1-based position in the stream
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1, col = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    int tline = line, tcol = col;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
           text[i] != '#') {
      ++i;
      ++col;
    }
    tokens.push_back(Token{std::string(text.substr(start, i - start)), tline, tcol,
                           static_cast<int>(tokens.size()) + 1});
  }
  return tokens;
}

[[noreturn]] void fail(const Token& tok, const std::string& what) {
  std::ostringstream msg;
  msg << "syntax error at token " << tok.index << " (line " << tok.line << ", column "
      << tok.column << "): " << what << " '" << tok.text << "'";
  throw SequenceParseError(msg.str(), tok.line, tok.column, tok.index);
}

double parse_number(const Token& tok, std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(tok, "malformed number in");
  return value;
}

// "NAME(<inner>)" -> inner, or empty on mismatch
std::string_view call_payload(std::string_view text, std::string_view name) {
  if (text.size() < name.size() + 2 || !text.starts_with(name)) return {};
  if (text[name.size()] != '(' || text.back() != ')') return {};
  return text.substr(name.size() + 1, text.size() - name.size() - 2);
}

}  // namespace

Sequence parse_sequence(std::string_view text) {
  std::vector<Token> tokens = tokenize(text);
  Sequence seq;
  std::size_t k = 0;

  if (!tokens.empty() && tokens[0].text == "timing") {
    if (tokens.size() < 3) fail(tokens[0], "incomplete timing header at");
    auto keyed = [&](const Token& tok, std::string_view key) {
      if (!tok.text.starts_with(key)) fail(tok, std::string("expected ") + std::string(key) + "<us> but got");
      double us = parse_number(tok, std::string_view(tok.text).substr(key.size()));
      if (!(us > 0.0)) fail(tok, "non-positive duration in");
      return from_us(us);
    };
    seq.timing.tau_shift = keyed(tokens[1], "tau_S=");
    seq.timing.tau_pi = keyed(tokens[2], "tau_pi=");
    k = 3;
  }

  for (; k < tokens.size(); ++k) {
    const Token& tok = tokens[k];
    const std::string& t = tok.text;
    if (t == "S+") {
      seq.blocks.push_back(make_shift(+1, seq.timing));
    } else if (t == "S-") {
      seq.blocks.push_back(make_shift(-1, seq.timing));
    } else if (t == "P") {
      seq.blocks.push_back(make_pi(seq.timing));
    } else if (auto q = call_payload(t, "Q"); !q.empty() || t.starts_with("Q(")) {
      if (q.empty()) fail(tok, "malformed split token");
      seq.blocks.push_back(make_split(parse_number(tok, q), seq.timing));
    } else if (auto idle = call_payload(t, "I"); !idle.empty() || t.starts_with("I(")) {
      if (idle.empty()) fail(tok, "malformed idle token");
      double us = parse_number(tok, idle);
      if (!(us > 0.0)) fail(tok, "non-positive duration in");
      seq.blocks.push_back(make_idle(from_us(us)));
    } else if (auto acc = call_payload(t, "A"); !acc.empty() || t.starts_with("A(")) {
      auto comma = acc.find(',');
      if (acc.empty() || comma == std::string_view::npos) fail(tok, "malformed acceleration token");
      double a = parse_number(tok, acc.substr(0, comma));
      double us = parse_number(tok, acc.substr(comma + 1));
      if (!(us > 0.0)) fail(tok, "non-positive duration in");
      seq.blocks.push_back(make_accel_window(a, from_us(us)));
    } else {
      fail(tok, "unknown token");
    }
  }
  return seq;
}

std::string serialize_sequence(const Sequence& seq) {
  std::string out;
  if (!(seq.timing == TimingParams{})) {
    out += "timing tau_S=" + format_us(seq.timing.tau_shift) +
           " tau_pi=" + format_us(seq.timing.tau_pi) + "\n";
  }
  bool first = true;
  for (const Block& b : seq.blocks) {
    if (!first) out += ' ';
    first = false;
    if (const auto* s = std::get_if<SplitPulse>(&b.op)) {
      out += "Q(" + format_double(s->probe_phase) + ")";
    } else if (const auto* sh = std::get_if<Shift>(&b.op)) {
      out += sh->direction >= 0 ? "S+" : "S-";
    } else if (std::holds_alternative<PiPulse>(b.op)) {
      out += 'P';
    } else if (std::holds_alternative<Idle>(b.op)) {
      out += "I(" + format_us(b.duration) + ")";
    } else if (const auto* a = std::get_if<AccelWindow>(&b.op)) {
      out += "A(" + format_double(a->accel) + "," + format_us(b.duration) + ")";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::array<int, 2>> arm_positions_half_steps(const Sequence& seq) {
  std::vector<std::array<int, 2>> pos;
  pos.reserve(seq.blocks.size() + 1);
  pos.push_back({0, 0});
  bool up_is_first = true;  // arm 0 starts spin-up; pi pulses toggle
  for (const Block& b : seq.blocks) {
    std::array<int, 2> p = pos.back();
    if (const auto* sh = std::get_if<Shift>(&b.op)) {
      int d0 = up_is_first ? sh->direction : -sh->direction;
      p[0] += d0;
      p[1] -= d0;
    } else if (std::holds_alternative<PiPulse>(b.op)) {
      up_is_first = !up_is_first;
    }
    pos.push_back(p);
  }
  return pos;
}

std::vector<Violation> validate_sequence(const Sequence& seq) {
  std::vector<Violation> out;
  const auto& blocks = seq.blocks;

  if (!(seq.timing.tau_shift > 0.0) || !(seq.timing.tau_pi > 0.0))
    out.push_back({-1, "timing parameters must be positive"});

  if (blocks.size() < 2) {
    out.push_back({-1, "sequence must start and end with a split pulse (Ramsey pair)"});
  } else {
    const auto* first = std::get_if<SplitPulse>(&blocks.front().op);
    if (first == nullptr)
      out.push_back({0, "first block must be a split pulse"});
    else if (first->probe_phase != 0.0)
      out.push_back({0, "first split must carry probe phase 0"});
    if (!std::holds_alternative<SplitPulse>(blocks.back().op))
      out.push_back({static_cast<int>(blocks.size()) - 1, "last block must be a split pulse"});
  }

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    int idx = static_cast<int>(i);
    if (!(b.duration > 0.0))
      out.push_back({idx, "block duration must be strictly positive"});
    if (const auto* sh = std::get_if<Shift>(&b.op)) {
      if (sh->direction != 1 && sh->direction != -1)
        out.push_back({idx, "shift direction must be +1 or -1"});
    }
    if (const auto* a = std::get_if<AccelWindow>(&b.op)) {
      if (!(std::abs(a->accel) < kCriticalAcceleration))
        out.push_back({idx, "acceleration " + format_double(a->accel) +
                                " m/s^2 reaches the interband tunneling guard (" +
                                format_double(kCriticalAcceleration) + " m/s^2)"});
    }
    if (std::holds_alternative<SplitPulse>(b.op) && i != 0 && i + 1 != blocks.size())
      out.push_back({idx, "split pulses are only allowed as the Ramsey pair at the ends"});
  }

  auto pos = arm_positions_half_steps(seq);
  int sep = pos.back()[0] - pos.back()[1];
  if (sep != 0)
    out.push_back({-1, "arms end separated by " + std::to_string(std::abs(sep)) +
                           " half-steps; paths must recombine"});
  return out;
}

// ---------------------------------------------------------------------------
// Geometry generators

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Sequence build_geometry(const GeometrySpec& spec, const TimingParams& timing) {
  require(spec.n_shifts >= 2 && spec.n_shifts % 2 == 0,
          "n_shifts must be an even integer >= 2");
  require(timing.tau_shift > 0.0 && timing.tau_pi > 0.0, "timing parameters must be positive");

  Sequence seq;
  seq.timing = timing;
  seq.blocks.push_back(make_split(0.0, timing));

  // Alternating shift directions keep the arms separating while pi pulses
  // flip the labels; a pulse sits in every gap between shifts except at the
  // apex, which gives n shifts and n-2 pulses per diamond body.
  auto append_body = [&](int n, const std::vector<Block>& apex) {
    for (int j = 1; j <= n; ++j) {
      seq.blocks.push_back(make_shift(j % 2 == 1 ? +1 : -1, timing));
      if (j == n / 2)
        seq.blocks.insert(seq.blocks.end(), apex.begin(), apex.end());
      else if (j != n)
        seq.blocks.push_back(make_pi(timing));
    }
  };

  switch (spec.kind) {
    case GeometryKind::SingleDiamond:
      append_body(spec.n_shifts, {});
      break;
    case GeometryKind::DoubleDiamond: {
      require(spec.n_shifts % 4 == 0, "double diamond needs n_shifts divisible by 4");
      append_body(spec.n_shifts / 2, {});
      seq.blocks.push_back(make_pi(timing));
      append_body(spec.n_shifts / 2, {});
      break;
    }
    case GeometryKind::HoldDiamond: {
      require(spec.t_hold >= 0.0, "t_hold must be non-negative");
      std::vector<Block> apex;
      if (spec.t_hold > 0.0) {
        // The dwell at maximum separation lasts t_hold in total; the two
        // echo pulses live inside it, so the idles carry the remainder.
        require(spec.t_hold > 2.0 * timing.tau_pi,
                "t_hold must exceed the two echo pi pulses (2*tau_pi) or be zero");
        double idle_total = spec.t_hold - 2.0 * timing.tau_pi;
        apex = {make_idle(idle_total / 4.0), make_pi(timing), make_idle(idle_total / 2.0),
                make_pi(timing), make_idle(idle_total / 4.0)};
      }
      append_body(spec.n_shifts, apex);
      break;
    }
    case GeometryKind::AccelDiamond: {
      require(spec.t_acc >= 0.0, "t_acc must be non-negative");
      require(std::abs(spec.accel) < kCriticalAcceleration,
              "acceleration reaches the interband tunneling guard");
      std::vector<Block> apex;
      if (spec.t_acc > 0.0) {
        // Acceleration windows total exactly t_acc; the echo pulses between
        // them add dwell but no accelerated time.
        apex = {make_accel_window(spec.accel, spec.t_acc / 4.0), make_pi(timing),
                make_accel_window(spec.accel, spec.t_acc / 2.0), make_pi(timing),
                make_accel_window(spec.accel, spec.t_acc / 4.0)};
      }
      append_body(spec.n_shifts, apex);
      break;
    }
  }

  seq.blocks.push_back(make_split(spec.probe_phase, timing));
  return seq;
}

}  // namespace dai
