#include "bops/problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bops {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_number(const std::string& token, const char* context) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  const auto [end, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || end != last || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(context) + ": non-numeric token '" + token + "'");
  }
  return v;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

void require_dimension(int expected, const Permutation& p, const char* what) {
  if (p.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": permutation dimension " +
                                std::to_string(p.size()) + " does not match instance size " +
                                std::to_string(expected));
  }
}

}  // namespace

// ---- QAPLIB -----------------------------------------------------------------

QapInstance parse_qaplib(std::istream& in) {
  std::string token;
  if (!(in >> token)) {
    throw std::invalid_argument("parse_qaplib: empty stream");
  }
  const double n_value = parse_number(token, "parse_qaplib");
  if (n_value != std::floor(n_value) || n_value < 2 || n_value > 1e5) {
    throw std::invalid_argument("parse_qaplib: instance size must be an integer >= 2");
  }
  QapInstance inst;
  inst.n = static_cast<int>(n_value);
  inst.a.resize(inst.n, inst.n);
  inst.b.resize(inst.n, inst.n);
  for (Eigen::MatrixXd* m : {&inst.a, &inst.b}) {
    const char* which = (m == &inst.a) ? "A" : "B";
    for (int i = 0; i < inst.n; ++i) {
      for (int j = 0; j < inst.n; ++j) {
        if (!(in >> token)) {
          throw std::invalid_argument(std::string("parse_qaplib: truncated stream while reading matrix ") +
                                      which);
        }
        (*m)(i, j) = parse_number(token, "parse_qaplib");
      }
    }
  }
  return inst;
}

std::string serialize_qaplib(const QapInstance& inst) {
  std::string out = std::to_string(inst.n) + "\n";
  for (const Eigen::MatrixXd* m : {&inst.a, &inst.b}) {
    out += "\n";
    for (int i = 0; i < inst.n; ++i) {
      for (int j = 0; j < inst.n; ++j) {
        if (j > 0) out += ' ';
        out += format_double((*m)(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

double qap_objective(const QapInstance& inst, const Permutation& p) {
  require_dimension(inst.n, p, "qap_objective");
  double total = 0.0;
  for (int i = 0; i < inst.n; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      total += inst.a(i, j) * inst.b(p[i], p[j]);
    }
  }
  return total;
}

// ---- TSPLIB -----------------------------------------------------------------

TspInstance parse_tsplib(std::istream& in, std::optional<int> subset) {
  TspInstance inst;
  std::optional<int> dimension;
  std::optional<std::string> edge_type;
  bool in_coords = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (upper(line) == "EOF") break;
    if (!in_coords) {
      const auto colon = line.find(':');
      const std::string key = upper(trim(line.substr(0, colon)));
      const std::string value = colon == std::string::npos ? "" : trim(line.substr(colon + 1));
      if (key == "NODE_COORD_SECTION") {
        in_coords = true;
      } else if (key == "NAME") {
        inst.name = value;
      } else if (key == "DIMENSION") {
        const double v = parse_number(value, "parse_tsplib DIMENSION");
        if (v != std::floor(v) || v < 0) {
          throw std::invalid_argument("parse_tsplib: DIMENSION must be a nonnegative integer");
        }
        dimension = static_cast<int>(v);
      } else if (key == "EDGE_WEIGHT_TYPE") {
        edge_type = upper(value);
        if (*edge_type != "EUC_2D") {
          throw std::invalid_argument("parse_tsplib: unsupported EDGE_WEIGHT_TYPE '" + value +
                                      "' (only EUC_2D)");
        }
      } else if (key == "TYPE") {
        if (upper(value) != "TSP") {
          throw std::invalid_argument("parse_tsplib: unsupported TYPE '" + value + "'");
        }
      } else if (key.find("SECTION") != std::string::npos) {
        throw std::invalid_argument("parse_tsplib: unsupported section " + key);
      }
      continue;
    }
    std::istringstream fields(line);
    std::string id, x, y, extra;
    if (!(fields >> id >> x >> y) || (fields >> extra)) {
      throw std::invalid_argument("parse_tsplib: malformed coordinate line '" + line + "'");
    }
    parse_number(id, "parse_tsplib node id");
    inst.coords.push_back({parse_number(x, "parse_tsplib"), parse_number(y, "parse_tsplib")});
  }
  if (!dimension) {
    throw std::invalid_argument("parse_tsplib: missing DIMENSION");
  }
  if (!edge_type) {
    throw std::invalid_argument("parse_tsplib: missing EDGE_WEIGHT_TYPE (only EUC_2D supported)");
  }
  if (static_cast<int>(inst.coords.size()) != *dimension) {
    throw std::invalid_argument("parse_tsplib: DIMENSION is " + std::to_string(*dimension) + " but " +
                                std::to_string(inst.coords.size()) + " coordinates were read");
  }
  if (subset) {
    if (*subset < 3 || *subset > *dimension) {
      throw std::invalid_argument("parse_tsplib: subset must be in [3, DIMENSION]");
    }
    inst.coords.resize(static_cast<std::size_t>(*subset));
  }
  inst.n = static_cast<int>(inst.coords.size());
  if (inst.n < 3) {
    throw std::invalid_argument("parse_tsplib: at least 3 nodes are required");
  }
  return inst;
}

std::string serialize_tsplib(const TspInstance& inst) {
  std::string out;
  out += "NAME : " + inst.name + "\n";
  out += "TYPE : TSP\n";
  out += "DIMENSION : " + std::to_string(inst.n) + "\n";
  out += "EDGE_WEIGHT_TYPE : EUC_2D\n";
  out += "NODE_COORD_SECTION\n";
  for (int i = 0; i < inst.n; ++i) {
    const auto& c = inst.coords[static_cast<std::size_t>(i)];
    out += std::to_string(i + 1) + " " + format_double(c[0]) + " " + format_double(c[1]) + "\n";
  }
  out += "EOF\n";
  return out;
}

double tsplib_round(double x) { return std::floor(x + 0.5); }

double tsp_tour_length(const TspInstance& inst, const Permutation& p) {
  require_dimension(inst.n, p, "tsp_tour_length");
  double total = 0.0;
  for (int i = 0; i < inst.n; ++i) {
    const auto& from = inst.coords[static_cast<std::size_t>(p[i])];
    const auto& to = inst.coords[static_cast<std::size_t>(p[(i + 1) % inst.n])];
    total += tsplib_round(std::hypot(from[0] - to[0], from[1] - to[1]));
  }
  return total;
}

// ---- Synthetic objectives ----------------------------------------------------

void SyntheticObjective::validate() const {
  if (!std::isfinite(scale)) {
    throw std::invalid_argument("SyntheticObjective: scale must be finite");
  }
  if (feature_weights.size() != 0) {
    if (feature_weights.size() != pair_count(dimension())) {
      throw std::invalid_argument("SyntheticObjective: feature weights must have length C(d,2)");
    }
    if (!feature_weights.allFinite()) {
      throw std::invalid_argument("SyntheticObjective: feature weights must be finite");
    }
  }
  if (!(noise_sd >= 0.0)) {
    throw std::invalid_argument("SyntheticObjective: noise_sd must be >= 0");
  }
}

double SyntheticObjective::deterministic(const Permutation& p) const {
  require_dimension(dimension(), p, "synthetic_objective");
  if (feature_weights.size() != 0) {
    return feature_weights.dot(kendall_feature_map(p));
  }
  return scale * discordant_pairs(p, target);
}

double synthetic_objective(const SyntheticObjective& s, const Permutation& p, Rng& rng) {
  const double value = s.deterministic(p);
  if (s.noise_sd == 0.0) {
    return value;
  }
  std::normal_distribution<double> noise(0.0, s.noise_sd);
  return value + noise(rng);
}

SyntheticObjective make_hidden_optimum(int d, double noise_sd, Rng& rng) {
  SyntheticObjective s{random_permutation(d, rng), 1.0, {}, noise_sd};
  s.validate();
  return s;
}

SyntheticObjective make_kendall_gp_draw(int d, double noise_sd, Rng& rng) {
  SyntheticObjective s{Permutation::identity(d), 1.0, Eigen::VectorXd(pair_count(d)), noise_sd};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < s.feature_weights.size(); ++i) {
    s.feature_weights(i) = normal(rng);
  }
  s.validate();
  return s;
}

// ---- Lazy GP prior draw ------------------------------------------------------

GpPriorSample::GpPriorSample(KernelSpec spec, int d, std::uint64_t seed, double noise_sd)
    : spec_(spec),
      d_(d),
      noise_sd_(noise_sd),
      latent_rng_(make_stream(seed, 0)),
      noise_rng_(make_stream(seed, 1)) {
  spec_.validate();
  if (d < 2) throw std::invalid_argument("GpPriorSample: dimension must be >= 2");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("GpPriorSample: noise_sd must be >= 0");
}

double GpPriorSample::latent(const Permutation& p) {
  require_dimension(d_, p, "GpPriorSample");
  if (const auto it = index_.find(p); it != index_.end()) {
    return values_[it->second];
  }
  const std::size_t n = points_.size();
  // Forward substitution for the new row of the Cholesky factor.
  Eigen::VectorXd row(static_cast<Eigen::Index>(n) + 1);
  double squared = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = kernel_value(spec_, points_[i], p);
    const Eigen::VectorXd& li = chol_rows_[i];
    for (std::size_t j = 0; j < i; ++j) {
      v -= li(static_cast<Eigen::Index>(j)) * row(static_cast<Eigen::Index>(j));
    }
    v /= li(static_cast<Eigen::Index>(i));
    row(static_cast<Eigen::Index>(i)) = v;
    squared += v * v;
  }
  const double diag = std::sqrt(std::max(spec_.signal_variance + spec_.jitter() - squared, spec_.jitter()));
  row(static_cast<Eigen::Index>(n)) = diag;

  std::normal_distribution<double> normal(0.0, 1.0);
  const double z = normal(latent_rng_);
  double value = diag * z;
  for (std::size_t j = 0; j < n; ++j) {
    value += row(static_cast<Eigen::Index>(j)) * whitened_[j];
  }
  points_.push_back(p);
  chol_rows_.push_back(std::move(row));
  whitened_.push_back(z);
  values_.push_back(value);
  index_.emplace(p, n);
  return value;
}

double GpPriorSample::operator()(const Permutation& p) {
  const double value = latent(p);
  if (noise_sd_ == 0.0) {
    return value;
  }
  std::normal_distribution<double> noise(0.0, noise_sd_);
  return value + noise(noise_rng_);
}

}  // namespace bops
