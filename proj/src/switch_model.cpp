#include "swctrl/switch_model.hpp"

#include "swctrl/errors.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace swctrl {
namespace {

using nlohmann::json;

std::string pair_key(const std::string& from, const std::string& to) {
  return from + "->" + to;
}

void require_finite(const Matrix& m, const std::string& field) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        throw InputError(field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                         "entry is not finite");
}

void require_shape(const Matrix& m, Index rows, Index cols, const std::string& field) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << "expected a " << rows << "x" << cols << " matrix, got " << m.rows() << "x"
        << m.cols();
    throw InputError(field, msg.str());
  }
  require_finite(m, field);
}

}  // namespace

SwitchSystem::SwitchSystem(SystemSpec spec) : spec_(std::move(spec)) {
  auto& s = spec_;
  if (s.N < 1) throw InputError("N", "state dimension must be positive");
  if (s.d < 1) throw InputError("d", "control dimension must be positive");
  const auto p = static_cast<Index>(s.modes.size());
  if (p < 1) throw InputError("modes", "at least one mode is required");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < s.modes.size(); ++i) {
    if (s.modes[i].empty())
      throw InputError("modes[" + std::to_string(i) + "]", "mode label is empty");
    if (!seen.insert(s.modes[i]).second)
      throw InputError("modes[" + std::to_string(i) + "]",
                       "duplicate mode label '" + s.modes[i] + "'");
  }
  if (static_cast<Index>(s.lambda.size()) != p)
    throw InputError("lambda", "expected one rate per mode");
  for (Index g = 0; g < p; ++g) {
    const double rate = s.lambda[static_cast<std::size_t>(g)];
    if (!std::isfinite(rate) || rate < 0.0)
      throw InputError("lambda." + s.modes[g], "jump rate must be finite and >= 0");
  }
  if (s.Q.rows() != p || s.Q.cols() != p)
    throw InputError("Q", "expected a " + std::to_string(p) + "x" + std::to_string(p) +
                              " transition matrix");
  for (Index g = 0; g < p; ++g) {
    const std::string row = "Q[" + std::to_string(g) + "]";
    for (Index th = 0; th < p; ++th) {
      const double q = s.Q(g, th);
      const std::string cell = row + "[" + std::to_string(th) + "]";
      if (!std::isfinite(q) || q < 0.0)
        throw InputError(cell, "transition probability must be finite and >= 0");
    }
    if (s.Q(g, g) != 0.0)
      throw InputError(row + "[" + std::to_string(g) + "]",
                       "diagonal must vanish, Q(γ,{γ}) = 0 (mode '" + s.modes[g] + "')");
    // Absorbing modes (lambda = 0) may leave their row at zero.
    const double total = s.Q.row(g).sum();
    const bool absorbing = s.lambda[static_cast<std::size_t>(g)] == 0.0 && total == 0.0;
    if (!absorbing && std::abs(total - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "row " << g << " (mode '" << s.modes[g] << "') sums to " << total
          << ", expected 1";
      throw InputError(row, msg.str());
    }
  }
  if (static_cast<Index>(s.A.size()) != p) throw InputError("A", "expected one matrix per mode");
  if (static_cast<Index>(s.B.size()) != p) throw InputError("B", "expected one matrix per mode");
  for (Index g = 0; g < p; ++g) {
    require_shape(s.A[static_cast<std::size_t>(g)], s.N, s.N, "A." + s.modes[g]);
    require_shape(s.B[static_cast<std::size_t>(g)], s.N, s.d, "B." + s.modes[g]);
  }
  for (const auto& [key, c] : s.C) {
    const auto [g, th] = key;
    if (g < 0 || g >= p || th < 0 || th >= p)
      throw InputError("C", "mode pair index out of range");
    require_shape(c, s.N, s.N, "C." + pair_key(s.modes[g], s.modes[th]));
  }
  if (s.M < 1) throw InputError("M", "jump cap must be a positive integer");
  if (!std::isfinite(s.T) || s.T <= 0.0) throw InputError("T", "horizon must be > 0");
  gamma0_ = mode_index(s.gamma0);
  zero_ = Matrix::Zero(s.N, s.N);
}

Index SwitchSystem::check(Index gamma) const {
  if (gamma < 0 || gamma >= num_modes())
    throw InputError("", "unknown mode index " + std::to_string(gamma));
  return gamma;
}

const std::string& SwitchSystem::mode_name(Index gamma) const {
  return spec_.modes[static_cast<std::size_t>(check(gamma))];
}

Index SwitchSystem::mode_index(std::string_view label) const {
  for (std::size_t i = 0; i < spec_.modes.size(); ++i)
    if (spec_.modes[i] == label) return static_cast<Index>(i);
  throw InputError("gamma0", "unknown mode '" + std::string(label) + "'");
}

const Matrix& SwitchSystem::C(Index gamma, Index theta) const {
  const auto it = spec_.C.find({check(gamma), check(theta)});
  return it == spec_.C.end() ? zero_ : it->second;
}

bool SwitchSystem::B_mode_independent() const {
  for (const auto& b : spec_.B)
    if (b != spec_.B.front()) return false;
  return true;
}

SwitchSystem SwitchSystem::with_gamma0(std::string_view label) const {
  SystemSpec s = spec_;
  s.gamma0 = std::string(label);
  return SwitchSystem(std::move(s));
}

SwitchSystem SwitchSystem::with_horizon(double T) const {
  SystemSpec s = spec_;
  s.T = T;
  return SwitchSystem(std::move(s));
}

SwitchSystem SwitchSystem::with_jump_cap(int M) const {
  SystemSpec s = spec_;
  s.M = M;
  return SwitchSystem(std::move(s));
}

SwitchSystem SwitchSystem::with_uniform_rate(double lambda) const {
  SystemSpec s = spec_;
  std::fill(s.lambda.begin(), s.lambda.end(), lambda);
  return SwitchSystem(std::move(s));
}

bool operator==(const SwitchSystem& a, const SwitchSystem& b) {
  const auto& x = a.spec_;
  const auto& y = b.spec_;
  return x.N == y.N && x.d == y.d && x.modes == y.modes && x.lambda == y.lambda &&
         x.Q == y.Q && x.A == y.A && x.B == y.B && x.C == y.C && x.M == y.M &&
         x.T == y.T && x.gamma0 == y.gamma0;
}

// ---------------------------------------------------------------------------
// Config documents

namespace {

const json& member(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(key, "missing required key");
  return doc.at(key);
}

Index read_count(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw InputError(field, "expected an integer");
  return v.get<Index>();
}

double read_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw InputError(field, "expected a number");
  return v.get<double>();
}

Matrix read_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw InputError(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Index>(v.size());
  Index cols = -1;
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    const std::string row_field = field + "[" + std::to_string(i) + "]";
    if (!row.is_array()) throw InputError(row_field, "expected an array of numbers");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw InputError(row_field, "ragged matrix row");
    }
    for (Index j = 0; j < cols; ++j)
      m(i, j) = read_number(row[static_cast<std::size_t>(j)],
                            row_field + "[" + std::to_string(j) + "]");
  }
  return m;
}

json write_matrix(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Index label_index(const std::vector<std::string>& modes, const std::string& label,
                  const std::string& field) {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i] == label) return static_cast<Index>(i);
  throw InputError(field, "unknown mode '" + label + "'");
}

std::vector<Matrix> read_mode_map(const json& v, const std::vector<std::string>& modes,
                                  const std::string& field) {
  if (!v.is_object()) throw InputError(field, "expected an object keyed by mode");
  std::vector<Matrix> out(modes.size());
  std::vector<bool> have(modes.size(), false);
  for (const auto& [label, value] : v.items()) {
    const auto g = static_cast<std::size_t>(label_index(modes, label, field + "." + label));
    out[g] = read_matrix(value, field + "." + label);
    have[g] = true;
  }
  for (std::size_t g = 0; g < modes.size(); ++g)
    if (!have[g]) throw InputError(field + "." + modes[g], "missing entry for mode");
  return out;
}

}  // namespace

SwitchSystem parse_system(const json& doc) {
  if (!doc.is_object()) throw InputError("", "config document must be a JSON object");
  static const std::set<std::string> known = {"N", "d", "modes", "lambda", "Q", "A",
                                              "B", "C", "M", "T", "gamma0"};
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key)) throw InputError(key, "unknown key");

  SystemSpec s;
  s.N = read_count(member(doc, "N"), "N");
  s.d = read_count(member(doc, "d"), "d");

  const json& modes = member(doc, "modes");
  if (!modes.is_array()) throw InputError("modes", "expected an array of strings");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (!modes[i].is_string())
      throw InputError("modes[" + std::to_string(i) + "]", "expected a string");
    s.modes.push_back(modes[i].get<std::string>());
  }

  const json& lambda = member(doc, "lambda");
  if (!lambda.is_object()) throw InputError("lambda", "expected an object keyed by mode");
  s.lambda.assign(s.modes.size(), 0.0);
  std::vector<bool> have(s.modes.size(), false);
  for (const auto& [label, value] : lambda.items()) {
    const auto g = static_cast<std::size_t>(label_index(s.modes, label, "lambda." + label));
    s.lambda[g] = read_number(value, "lambda." + label);
    have[g] = true;
  }
  for (std::size_t g = 0; g < s.modes.size(); ++g)
    if (!have[g]) throw InputError("lambda." + s.modes[g], "missing rate for mode");

  s.Q = read_matrix(member(doc, "Q"), "Q");
  s.A = read_mode_map(member(doc, "A"), s.modes, "A");

  const json& B = member(doc, "B");
  if (B.is_array()) {
    s.B.assign(s.modes.size(), read_matrix(B, "B"));
  } else {
    s.B = read_mode_map(B, s.modes, "B");
  }

  if (doc.contains("C")) {
    const json& C = doc.at("C");
    if (!C.is_object()) throw InputError("C", "expected an object keyed by \"from->to\"");
    for (const auto& [key, value] : C.items()) {
      const auto arrow = key.find("->");
      if (arrow == std::string::npos)
        throw InputError("C." + key, "key must have the form \"from->to\"");
      const Index g = label_index(s.modes, key.substr(0, arrow), "C." + key);
      const Index th = label_index(s.modes, key.substr(arrow + 2), "C." + key);
      s.C[{g, th}] = read_matrix(value, "C." + key);
    }
  }

  s.M = static_cast<int>(read_count(member(doc, "M"), "M"));
  s.T = read_number(member(doc, "T"), "T");
  const json& g0 = member(doc, "gamma0");
  if (!g0.is_string()) throw InputError("gamma0", "expected a mode label");
  s.gamma0 = g0.get<std::string>();
  return SwitchSystem(std::move(s));
}

SwitchSystem parse_system_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_system(doc);
}

json serialize_system(const SwitchSystem& system) {
  const auto& s = system.spec();
  json doc;
  doc["N"] = s.N;
  doc["d"] = s.d;
  doc["modes"] = s.modes;
  json lambda = json::object();
  json A = json::object();
  json B = json::object();
  for (std::size_t g = 0; g < s.modes.size(); ++g) {
    lambda[s.modes[g]] = s.lambda[g];
    A[s.modes[g]] = write_matrix(s.A[g]);
    B[s.modes[g]] = write_matrix(s.B[g]);
  }
  doc["lambda"] = lambda;
  doc["Q"] = write_matrix(s.Q);
  doc["A"] = A;
  doc["B"] = B;
  json C = json::object();
  for (const auto& [key, c] : s.C)
    C[pair_key(s.modes[static_cast<std::size_t>(key.first)],
               s.modes[static_cast<std::size_t>(key.second)])] = write_matrix(c);
  if (!C.empty()) doc["C"] = C;
  doc["M"] = s.M;
  doc["T"] = s.T;
  doc["gamma0"] = s.gamma0;
  return doc;
}

// ---------------------------------------------------------------------------

Matrix cal_A_star(const SwitchSystem& system, Index gamma) {
  const Index n = system.N();
  Matrix out = system.A(gamma).transpose();
  const double rate = system.lambda(gamma);
  if (rate == 0.0) return out;
  for (Index th = 0; th < system.num_modes(); ++th) {
    const double q = system.Q(gamma, th);
    if (q == 0.0) continue;
    out -= rate * q * (system.C(gamma, th).transpose() + Matrix::Identity(n, n));
  }
  return out;
}

Vector jump_intensity(const SwitchSystem& system, int level, Index gamma, double t) {
  if (t < 0.0) throw std::invalid_argument("jump_intensity: negative time");
  Vector rates = Vector::Zero(system.num_modes());
  const double rate = system.lambda(gamma);
  if (level > system.M() - 1 || t > system.T()) return rates;
  for (Index th = 0; th < system.num_modes(); ++th) rates(th) = rate * system.Q(gamma, th);
  return rates;
}

ModeTrajectory::ModeTrajectory(Index gamma0, int jump_cap) : cap_(jump_cap) {
  marks_.reserve(static_cast<std::size_t>(jump_cap) + 1);
  marks_.push_back({0.0, gamma0});
}

void ModeTrajectory::push(double t, Index gamma) {
  if (level() >= cap_)
    throw std::logic_error("ModeTrajectory: jump cap " + std::to_string(cap_) + " reached");
  if (!(t > last_time()))
    throw std::logic_error("ModeTrajectory: mark times must be strictly increasing");
  marks_.push_back({t, gamma});
}

ModeTrajectory ModeTrajectory::concat(double t, Index gamma) const {
  ModeTrajectory out = *this;
  out.push(t, gamma);
  return out;
}

}  // namespace swctrl
