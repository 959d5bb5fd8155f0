#include "t3i/seqfile.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <regex>
#include <set>

#include "t3i/errors.hpp"

namespace t3i {

namespace {

struct Token {
  std::string text;
  int column;
};

struct Line {
  int number;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      const std::size_t start = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i > start) line.tokens.push_back({std::string(raw.substr(start, i - start)), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

const std::regex decimal_re(R"([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)");
const std::regex integer_re(R"([+-]?\d+)");
const std::regex multiple_re(R"((\d+)?(?:/(\d+))?\*?T)");

double parse_double(const std::string& s, int line, int col) {
  if (!std::regex_match(s, decimal_re)) throw ParseError("expected a decimal number, got '" + s + "'", line, col);
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

long parse_int(const std::string& s, int line, int col) {
  if (!std::regex_match(s, integer_re)) throw ParseError("expected an integer, got '" + s + "'", line, col);
  long v = 0;
  const auto* first = s.data() + (s[0] == '+' ? 1 : 0);
  std::from_chars(first, s.data() + s.size(), v);
  return v;
}

struct KeyValue {
  std::string value;
  int column;  // column of the value
};

// key=value tokens of a directive; unknown or repeated keys are errors.
std::map<std::string, KeyValue> key_values(const Line& line, std::size_t first, const std::set<std::string>& allowed,
                                           const std::set<std::string>& required) {
  std::map<std::string, KeyValue> kv;
  for (std::size_t i = first; i < line.tokens.size(); ++i) {
    const auto& tok = line.tokens[i];
    const auto eq = tok.text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == tok.text.size())
      throw ParseError("expected key=value, got '" + tok.text + "'", line.number, tok.column);
    const std::string key = tok.text.substr(0, eq);
    if (!allowed.count(key)) throw ParseError("unknown key '" + key + "'", line.number, tok.column);
    if (kv.count(key)) throw ParseError("duplicate key '" + key + "'", line.number, tok.column);
    kv[key] = {tok.text.substr(eq + 1), tok.column + static_cast<int>(eq) + 1};
  }
  for (const auto& key : required)
    if (!kv.count(key))
      throw ParseError("missing key '" + key + "' in " + line.tokens[0].text, line.number, line.tokens[0].column);
  return kv;
}

double number(const std::map<std::string, KeyValue>& kv, const std::string& key, int line) {
  const auto& v = kv.at(key);
  return parse_double(v.value, line, v.column);
}

double parse_area(const KeyValue& v, int line) {
  if (v.value == "pi/2") return std::numbers::pi / 2;
  if (v.value == "pi") return std::numbers::pi;
  return parse_double(v.value, line, v.column);
}

struct PendingTime {
  std::optional<double> value;
  std::optional<TimeMultiple> multiple;
};

PendingTime parse_time(const KeyValue& v, int line) {
  if (v.value.find('T') == std::string::npos) return {parse_double(v.value, line, v.column), std::nullopt};
  std::smatch m;
  if (!std::regex_match(v.value, m, multiple_re))
    throw ParseError("pulse time must be a number or an integer or rational multiple of T", line, v.column);
  TimeMultiple mult{m[1].matched ? std::stol(m[1].str()) : 1, m[2].matched ? std::stol(m[2].str()) : 1};
  if (mult.den == 0) throw ParseError("zero denominator in pulse time", line, v.column);
  return {std::nullopt, mult};
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

InterferometerSequence SequenceFile::sequence() const {
  const auto acc = accelerations(atom, field, constants());
  InterferometerSequence seq;
  seq.a1 = acc.a1;
  seq.a2 = acc.a2;
  seq.mass = atom.mass;
  for (const auto& p : pulses) seq.pulses.push_back({p.time, p.area, p.phase});
  return seq;
}

GaussianPacket SequenceFile::initial_packet() const {
  GaussianPacket g;
  g.time = pulses.empty() ? 0.0 : pulses.front().time;
  if (packet) {
    g.center = packet->z0;
    g.velocity = packet->v0;
    g.width = packet->width;
  } else {
    const double t10 = pulses.size() > 1 ? pulses[1].time - pulses[0].time : 1.0;
    g.width = std::sqrt(constants().hbar * t10 / atom.mass);
  }
  return g;
}

bool SequenceFile::operator==(const SequenceFile& o) const {
  auto same_states = [](const AtomConfig& a, const AtomConfig& b) {
    if (a.states.size() != b.states.size()) return false;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      const auto &x = a.states[i], &y = b.states[i];
      if (x.label != y.label || x.lande_g != y.lande_g || x.m_quantum != y.m_quantum) return false;
    }
    return true;
  };
  auto same_grid = [](const std::optional<Grid>& a, const std::optional<Grid>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->z_min == b->z_min && a->z_max == b->z_max && a->n == b->n);
  };
  return natural_units == o.natural_units && atom.mass == o.atom.mass && same_states(atom, o.atom) &&
         field.g == o.field.g && field.B0 == o.field.B0 && field.grad_Bz == o.field.grad_Bz && T == o.T &&
         pulses == o.pulses && same_grid(grid, o.grid) && packet == o.packet;
}

SequenceFile parse_sequence_file(std::string_view text) {
  SequenceFile file;
  bool have_atom = false, have_field = false, have_units = false;
  std::vector<PendingTime> times;
  std::set<std::string> labels;

  for (const auto& line : tokenize(text)) {
    const auto& head = line.tokens[0];
    const int ln = line.number;
    if (head.text.rfind("units=", 0) == 0) {
      if (have_units) throw ParseError("duplicate units line", ln, head.column);
      if (line.tokens.size() > 1) throw ParseError("unexpected token after units", ln, line.tokens[1].column);
      const std::string u = head.text.substr(6);
      if (u != "natural" && u != "si") throw ParseError("units must be 'natural' or 'si'", ln, head.column + 6);
      if (have_atom) throw ParseError("units must precede the atom block", ln, head.column);
      file.natural_units = u == "natural";
      have_units = true;
    } else if (head.text == "atom") {
      if (have_atom) throw ParseError("duplicate atom block", ln, head.column);
      auto kv = key_values(line, 1, {"mass"}, {"mass"});
      file.atom.mass = number(kv, "mass", ln);
      if (!(file.atom.mass > 0.0)) throw ParseError("atom mass must be positive", ln, kv["mass"].column);
      if (file.natural_units && file.atom.mass != 1.0)
        throw ParseError("atom mass must be 1 with units=natural", ln, kv["mass"].column);
      have_atom = true;
    } else if (head.text == "field") {
      if (have_field) throw ParseError("duplicate field block", ln, head.column);
      auto kv = key_values(line, 1, {"g", "B0", "gradBz"}, {"g", "B0", "gradBz"});
      file.field = {number(kv, "g", ln), number(kv, "B0", ln), number(kv, "gradBz", ln)};
      have_field = true;
    } else if (head.text == "state") {
      if (line.tokens.size() < 2 || line.tokens[1].text.find('=') != std::string::npos)
        throw ParseError("state needs a label", ln, head.column);
      const auto& label = line.tokens[1];
      if (!labels.insert(label.text).second)
        throw ParseError("duplicate state '" + label.text + "'", ln, label.column);
      auto kv = key_values(line, 2, {"gF", "mF"}, {"gF", "mF"});
      InternalState s;
      s.label = label.text;
      s.lande_g = number(kv, "gF", ln);
      s.m_quantum = static_cast<int>(parse_int(kv["mF"].value, ln, kv["mF"].column));
      file.atom.states.push_back(s);
    } else if (head.text == "param") {
      auto kv = key_values(line, 1, {"T"}, {"T"});
      if (file.T) throw ParseError("duplicate param T", ln, head.column);
      file.T = number(kv, "T", ln);
      if (!(*file.T > 0.0)) throw ParseError("param T must be positive", ln, kv["T"].column);
    } else if (head.text == "pulse") {
      auto kv = key_values(line, 1, {"t", "area", "phase"}, {"t", "area", "phase"});
      PulseSpec p;
      p.line = ln;
      p.area = parse_area(kv["area"], ln);
      if (!(p.area > 0.0 && p.area <= 2 * std::numbers::pi))
        throw ParseError("pulse area must lie in (0, 2 pi]", ln, kv["area"].column);
      p.phase = number(kv, "phase", ln);
      times.push_back(parse_time(kv["t"], ln));
      file.pulses.push_back(p);
    } else if (head.text == "grid") {
      if (file.grid) throw ParseError("duplicate grid block", ln, head.column);
      auto kv = key_values(line, 1, {"zmin", "zmax", "n"}, {"zmin", "zmax", "n"});
      Grid g{number(kv, "zmin", ln), number(kv, "zmax", ln),
             static_cast<std::size_t>(std::max(0L, parse_int(kv["n"].value, ln, kv["n"].column)))};
      try {
        g.validate();
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), ln, head.column);
      }
      file.grid = g;
    } else if (head.text == "packet") {
      if (file.packet) throw ParseError("duplicate packet block", ln, head.column);
      auto kv = key_values(line, 1, {"z0", "v0", "width"}, {"width"});
      PacketSpec p;
      if (kv.count("z0")) p.z0 = number(kv, "z0", ln);
      if (kv.count("v0")) p.v0 = number(kv, "v0", ln);
      p.width = number(kv, "width", ln);
      if (!(p.width > 0.0)) throw ParseError("packet width must be positive", ln, kv["width"].column);
      file.packet = p;
    } else {
      throw ParseError("unknown directive '" + head.text + "'", ln, head.column);
    }
  }

  if (!have_atom) throw ParseError("missing atom block");
  if (!have_field) throw ParseError("missing field block");
  for (const char* label : {"g1", "g2"})
    if (!labels.count(label)) throw ParseError(std::string("missing state '") + label + "'");
  for (const auto& s : file.atom.states)
    if (s.label == "g1" && s.m_quantum != 0) throw ParseError("state g1 must have mF=0");

  for (std::size_t i = 0; i < file.pulses.size(); ++i) {
    auto& p = file.pulses[i];
    if (times[i].multiple) {
      if (!file.T) throw ParseError("pulse time uses T but no 'param T' is given", p.line, 1);
      p.multiple = times[i].multiple;
      p.time = static_cast<double>(p.multiple->num) * *file.T / static_cast<double>(p.multiple->den);
    } else {
      p.time = *times[i].value;
    }
    if (i > 0 && !(p.time > file.pulses[i - 1].time))
      throw ParseError("pulse times must increase (line " + std::to_string(p.line) + ")", p.line, 1);
  }
  if (file.pulses.size() < 2) throw ParseError("a sequence needs at least two pulses");
  return file;
}

std::string format_sequence_file(const SequenceFile& file) {
  std::string out;
  if (file.natural_units) out += "units=natural\n";
  out += fmt::format("atom mass={}\n", format_double(file.atom.mass));
  out += fmt::format("field g={} B0={} gradBz={}\n", format_double(file.field.g), format_double(file.field.B0),
                     format_double(file.field.grad_Bz));
  for (const auto& s : file.atom.states)
    out += fmt::format("state {} gF={} mF={}\n", s.label, format_double(s.lande_g), s.m_quantum);
  if (file.T) out += fmt::format("param T={}\n", format_double(*file.T));
  for (const auto& p : file.pulses) {
    std::string t;
    if (p.multiple) {
      t = p.multiple->num == 0 ? "0" : (p.multiple->num == 1 ? "" : std::to_string(p.multiple->num));
      if (p.multiple->num != 0) t += (p.multiple->den == 1 ? "" : "/" + std::to_string(p.multiple->den)) + "T";
      if (p.multiple->num == 0) t = "0T";
    } else {
      t = format_double(p.time);
    }
    std::string area = p.area == std::numbers::pi / 2 ? "pi/2"
                       : p.area == std::numbers::pi   ? "pi"
                                                      : format_double(p.area);
    out += fmt::format("pulse t={} area={} phase={}\n", t, area, format_double(p.phase));
  }
  if (file.grid)
    out += fmt::format("grid zmin={} zmax={} n={}\n", format_double(file.grid->z_min), format_double(file.grid->z_max),
                       file.grid->n);
  if (file.packet)
    out += fmt::format("packet z0={} v0={} width={}\n", format_double(file.packet->z0),
                       format_double(file.packet->v0), format_double(file.packet->width));
  return out;
}

}  // namespace t3i
