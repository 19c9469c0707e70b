#include "painet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "painet/rng.hpp"

namespace painet {

void SimConfig::validate() const {
  if (n_particles == 0) throw contract_error("n_particles must be >= 1");
  if (dt_sim <= 0.0) throw contract_error("dt_sim must be positive");
  if (stride < 1) throw contract_error("stride must be >= 1");
  if (frames < 1) throw contract_error("frames must be >= 1");
  if (spring_k < 0.0) throw contract_error("spring_k must be >= 0");
  if (rest_length <= 0.0) throw contract_error("rest_length must be positive");
  if (type_charges.empty()) throw contract_error("need at least one particle type");
  if (!masses.empty() && masses.size() != n_particles) {
    throw contract_error("masses must be empty or sized n_particles");
  }
  for (double m : masses) {
    if (m <= 0.0) throw contract_error("masses must be positive");
  }
}

namespace {

/// Ring plus seeded random chords; depends only on cfg.seed.
std::vector<std::pair<std::size_t, std::size_t>> spring_topology(const SimConfig& cfg) {
  std::size_t n = cfg.n_particles;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n == 2) {
    pairs.emplace_back(0, 1);
  } else if (n >= 3) {
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
  }
  if (n >= 4 && cfg.extra_springs > 0) {
    Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
    auto adjacent = [n](std::size_t a, std::size_t b) {
      return (a + 1) % n == b || (b + 1) % n == a;
    };
    std::size_t added = 0, attempts = 0;
    while (added < cfg.extra_springs && attempts < 100 * cfg.extra_springs) {
      ++attempts;
      std::size_t a = rng.integer(n), b = rng.integer(n);
      if (a == b || adjacent(a, b)) continue;
      auto pr = std::minmax(a, b);
      std::pair<std::size_t, std::size_t> cand{pr.first, pr.second};
      if (std::find(pairs.begin(), pairs.end(), cand) != pairs.end()) continue;
      pairs.push_back(cand);
      ++added;
    }
  }
  return pairs;
}

/// Pairwise forces, Newton's third law applied per pair so momentum is
/// conserved to rounding.
void accumulate_forces(const SimConfig& cfg,
                       const std::vector<std::pair<std::size_t, std::size_t>>& springs,
                       const Array& x, Array& force) {
  std::size_t n = cfg.n_particles;
  for (std::size_t i = 0; i < force.numel(); ++i) force[i] = 0.0;
  double eps2 = cfg.softening() * cfg.softening();
  for (const auto& [i, j] : springs) {
    double rx = x(i, 0) - x(j, 0), ry = x(i, 1) - x(j, 1), rz = x(i, 2) - x(j, 2);
    double dist = std::sqrt(rx * rx + ry * ry + rz * rz);
    if (dist < 1e-12) continue;
    double mag = -cfg.spring_k * (dist - cfg.rest_length) / dist;
    force(i, 0) += mag * rx;
    force(i, 1) += mag * ry;
    force(i, 2) += mag * rz;
    force(j, 0) -= mag * rx;
    force(j, 1) -= mag * ry;
    force(j, 2) -= mag * rz;
  }
  if (cfg.coulomb_c != 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double rx = x(i, 0) - x(j, 0), ry = x(i, 1) - x(j, 1), rz = x(i, 2) - x(j, 2);
        double d2 = rx * rx + ry * ry + rz * rz;
        double dist = std::sqrt(d2);
        if (dist < 1e-12) continue;
        double mag = cfg.coulomb_c * cfg.charge(i) * cfg.charge(j) / (dist * (d2 + eps2));
        force(i, 0) += mag * rx;
        force(i, 1) += mag * ry;
        force(i, 2) += mag * rz;
        force(j, 0) -= mag * rx;
        force(j, 1) -= mag * ry;
        force(j, 2) -= mag * rz;
      }
    }
  }
}

std::array<double, 3> total_momentum(const SimConfig& cfg, const Array& v) {
  std::array<double, 3> p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < cfg.n_particles; ++i) {
    for (std::size_t k = 0; k < 3; ++k) p[k] += cfg.mass(i) * v(i, k);
  }
  return p;
}

}  // namespace

double mechanical_energy(const SimConfig& cfg,
                         const std::vector<std::pair<std::size_t, std::size_t>>& spring_pairs,
                         const Array& positions, const Array& velocities) {
  double e = 0.0;
  for (std::size_t i = 0; i < cfg.n_particles; ++i) {
    double v2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) v2 += velocities(i, k) * velocities(i, k);
    e += 0.5 * cfg.mass(i) * v2;
  }
  for (const auto& [i, j] : spring_pairs) {
    double dist = std::sqrt(row_sqdist(positions, i, positions, j));
    double stretch = dist - cfg.rest_length;
    e += 0.5 * cfg.spring_k * stretch * stretch;
  }
  if (cfg.coulomb_c != 0.0) {
    double eps = cfg.softening();
    for (std::size_t i = 0; i < cfg.n_particles; ++i) {
      for (std::size_t j = i + 1; j < cfg.n_particles; ++j) {
        double dist = std::sqrt(row_sqdist(positions, i, positions, j));
        e += -(cfg.coulomb_c * cfg.charge(i) * cfg.charge(j) / eps) * std::atan(dist / eps);
      }
    }
  }
  return e;
}

std::vector<std::pair<std::size_t, std::size_t>> spring_pairs(const SimConfig& cfg) {
  return spring_topology(cfg);
}

SimResult simulate(const SimConfig& cfg, std::uint64_t ic_seed) {
  cfg.validate();
  std::size_t n = cfg.n_particles;
  Rng rng(ic_seed);
  Array x({n, 3});
  double radius = cfg.rest_length * static_cast<double>(n) / (2.0 * 3.14159265358979323846);
  for (std::size_t i = 0; i < n; ++i) {
    double ang = 2.0 * 3.14159265358979323846 * static_cast<double>(i) / static_cast<double>(n);
    x(i, 0) = radius * std::cos(ang) + cfg.init_noise * rng.gaussian();
    x(i, 1) = radius * std::sin(ang) + cfg.init_noise * rng.gaussian();
    x(i, 2) = cfg.init_noise * rng.gaussian();
  }
  Array v({n, 3});
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = cfg.init_speed * rng.gaussian();
  return integrate(cfg, x, v);
}

SimResult integrate(const SimConfig& cfg, const Array& positions, const Array& velocities) {
  cfg.validate();
  std::size_t n = cfg.n_particles;
  if (positions.shape() != Shape{n, 3} || velocities.shape() != Shape{n, 3}) {
    throw shape_error("initial conditions must be " + std::to_string(n) + "x3");
  }
  auto springs = spring_topology(cfg);
  Array x = positions;
  Array v = velocities;

  SimResult result;
  result.state.positions = x;
  result.state.velocities = v;
  result.state.types.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.state.types[i] = i % cfg.n_types();
  result.state.features = Array({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    result.state.features(i, 0) = cfg.charge(i);
    result.state.features(i, 1) = cfg.mass(i);
  }
  Array pair_attrs = Array::full({springs.size(), 1}, 1.0);
  result.state.graph = ObservedGraph::undirected(n, springs, pair_attrs);

  result.trajectory.dt = cfg.frame_dt();
  result.trajectory.start_time = 0.0;
  result.frame_momentum.push_back(total_momentum(cfg, v));
  result.frame_energy.push_back(mechanical_energy(cfg, springs, x, v));

  Array force({n, 3});
  accumulate_forces(cfg, springs, x, force);
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    for (std::size_t s = 0; s < cfg.stride; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double half = 0.5 * cfg.dt_sim / cfg.mass(i);
        for (std::size_t k = 0; k < 3; ++k) {
          v(i, k) += half * force(i, k);
          x(i, k) += cfg.dt_sim * v(i, k);
        }
      }
      accumulate_forces(cfg, springs, x, force);
      for (std::size_t i = 0; i < n; ++i) {
        double half = 0.5 * cfg.dt_sim / cfg.mass(i);
        for (std::size_t k = 0; k < 3; ++k) v(i, k) += half * force(i, k);
      }
    }
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (!std::isfinite(x[i]) || std::fabs(x[i]) > 1e6) {
        throw numeric_error("integration blow-up at frame " + std::to_string(f + 1) +
                            "; reduce dt_sim (current " + std::to_string(cfg.dt_sim) + ")");
      }
    }
    result.trajectory.frames.push_back(x);
    result.frame_momentum.push_back(total_momentum(cfg, v));
    result.frame_energy.push_back(mechanical_energy(cfg, springs, x, v));
  }
  return result;
}

SampleSet Dataset::subset(const std::vector<std::size_t>& idx) const {
  SampleSet out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples.at(i));
  return out;
}

Dataset build_dataset(const SimConfig& cfg, std::size_t n_samples,
                      const std::array<double, 3>& split_ratios, std::uint64_t seed) {
  cfg.validate();
  if (n_samples == 0) throw contract_error("n_samples must be >= 1");
  double ratio_sum = split_ratios[0] + split_ratios[1] + split_ratios[2];
  if (std::fabs(ratio_sum - 1.0) > 1e-9) {
    throw contract_error("split ratios must sum to 1, got " + std::to_string(ratio_sum));
  }

  Dataset ds;
  Rng master(seed);
  for (std::size_t s = 0; s < n_samples; ++s) {
    SimResult r = simulate(cfg, master.raw());
    ds.samples.push_back({std::move(r.state), std::move(r.trajectory)});
  }

  std::vector<std::size_t> order(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
  master.shuffle(order);
  auto n_train = static_cast<std::size_t>(std::llround(split_ratios[0] * n_samples));
  auto n_val = static_cast<std::size_t>(std::llround(split_ratios[1] * n_samples));
  n_train = std::min(n_train, n_samples);
  n_val = std::min(n_val, n_samples - n_train);
  ds.train_idx.assign(order.begin(), order.begin() + n_train);
  ds.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  ds.test_idx.assign(order.begin() + n_train + n_val, order.end());

  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  ds.provenance["seed"] = std::to_string(seed);
  ds.provenance["topology_seed"] = std::to_string(cfg.seed);
  ds.provenance["k"] = fmt(cfg.spring_k);
  ds.provenance["r0"] = fmt(cfg.rest_length);
  ds.provenance["c"] = fmt(cfg.coulomb_c);
  ds.provenance["dt_sim"] = fmt(cfg.dt_sim);
  ds.provenance["stride"] = std::to_string(cfg.stride);
  ds.provenance["extra_springs"] = std::to_string(cfg.extra_springs);
  ds.provenance["init_noise"] = fmt(cfg.init_noise);
  ds.provenance["init_speed"] = fmt(cfg.init_speed);
  ds.provenance["softening"] = fmt(cfg.softening());
  std::string charges;
  for (std::size_t i = 0; i < cfg.type_charges.size(); ++i) {
    if (i) charges += ",";
    charges += fmt(cfg.type_charges[i]);
  }
  ds.provenance["charges"] = charges;
  return ds;
}

Trajectory linear_baseline(const SystemState& state, std::size_t horizon, double dt) {
  Trajectory out;
  out.dt = dt;
  out.frames.reserve(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    Array frame = state.positions;
    for (std::size_t i = 0; i < frame.rows(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        frame(i, k) += state.velocities(i, k) * static_cast<double>(t) * dt;
      }
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

// ---------------------------------------------------------------------------
// text format

namespace {

void write_floats(std::ostream& os, const Array& a) {
  char buf[64];
  for (std::size_t i = 0; i < a.numel(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g", a[i]);
    os << buf;
  }
}

struct LineReader {
  std::istream& is;
  std::size_t line_no = 0;

  bool next(std::string& line) {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw parse_error(msg, line_no); }
};

double parse_double(const std::string& tok, const LineReader& r) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw parse_error("bad float '" + tok + "'", r.line_no);
  }
}

std::size_t parse_size(const std::string& tok, const LineReader& r) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(tok, &pos);
    if (pos != tok.size() || v < 0) throw std::invalid_argument(tok);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw parse_error("bad integer '" + tok + "'", r.line_no);
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open " + path + " for writing");
  if (ds.samples.empty()) throw contract_error("refusing to write empty dataset");

  const Sample& first = ds.samples.front();
  os << "painet.dataset version=1"
     << " samples=" << ds.samples.size()
     << " particles=" << first.state.n_particles()
     << " feat_dim=" << first.state.features.cols()
     << " edge_attr_dim=" << first.state.graph.attr_dim()
     << " frames=" << first.truth.n_steps();
  char buf[64];
  std::snprintf(buf, sizeof(buf), " dt=%.17g start_time=%.17g", first.truth.dt,
                first.truth.start_time);
  os << buf;
  for (const auto& [k, v] : ds.provenance) os << " " << k << "=" << v;
  os << "\n";

  auto write_split = [&os](const char* name, const std::vector<std::size_t>& idx) {
    os << "split " << name;
    for (std::size_t i : idx) os << " " << i;
    os << "\n";
  };
  write_split("train", ds.train_idx);
  write_split("val", ds.val_idx);
  write_split("test", ds.test_idx);

  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    const Sample& smp = ds.samples[s];
    os << "sample " << s << "\n";
    os << "types";
    for (std::size_t t : smp.state.types) os << " " << t;
    os << "\n";
    os << "features";
    write_floats(os, smp.state.features);
    os << "\n";
    os << "edges " << smp.state.graph.n_edges() << "\n";
    for (std::size_t e = 0; e < smp.state.graph.n_edges(); ++e) {
      os << "edge " << smp.state.graph.edges[e].first << " " << smp.state.graph.edges[e].second;
      for (std::size_t c = 0; c < smp.state.graph.attr_dim(); ++c) {
        std::snprintf(buf, sizeof(buf), " %.17g", smp.state.graph.edge_attrs(e, c));
        os << buf;
      }
      os << "\n";
    }
    os << "x0";
    write_floats(os, smp.state.positions);
    os << "\n";
    os << "v0";
    write_floats(os, smp.state.velocities);
    os << "\n";
    for (std::size_t f = 0; f < smp.truth.n_steps(); ++f) {
      os << "frame " << f;
      write_floats(os, smp.truth.frames[f]);
      os << "\n";
    }
  }
  if (!os) throw io_error("write failure on " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open " + path);
  LineReader reader{is};
  std::string line;

  if (!reader.next(line)) throw parse_error("missing header", 1);
  auto head = split_ws(line);
  if (head.empty() || head[0] != "painet.dataset") reader.fail("missing header");

  Dataset ds;
  std::size_t n_samples = 0, n_particles = 0, feat_dim = 0, edge_attr_dim = 0, n_frames = 0;
  double dt = 1.0, start_time = 0.0;
  for (std::size_t i = 1; i < head.size(); ++i) {
    auto eq = head[i].find('=');
    if (eq == std::string::npos) reader.fail("header token '" + head[i] + "' is not key=value");
    std::string key = head[i].substr(0, eq), val = head[i].substr(eq + 1);
    if (key == "version") {
      if (parse_size(val, reader) > 1) reader.fail("unsupported dataset version " + val);
    } else if (key == "samples") {
      n_samples = parse_size(val, reader);
    } else if (key == "particles") {
      n_particles = parse_size(val, reader);
    } else if (key == "feat_dim") {
      feat_dim = parse_size(val, reader);
    } else if (key == "edge_attr_dim") {
      edge_attr_dim = parse_size(val, reader);
    } else if (key == "frames") {
      n_frames = parse_size(val, reader);
    } else if (key == "dt") {
      dt = parse_double(val, reader);
    } else if (key == "start_time") {
      start_time = parse_double(val, reader);
    } else {
      ds.provenance[key] = val;
    }
  }
  if (n_samples == 0) reader.fail("header declares no samples");

  auto read_split = [&](const char* name, std::vector<std::size_t>& idx) {
    if (!reader.next(line)) reader.fail(std::string("expected 'split ") + name + "' line");
    auto toks = split_ws(line);
    if (toks.size() < 2 || toks[0] != "split" || toks[1] != name) {
      reader.fail(std::string("expected 'split ") + name + "', got '" + line + "'");
    }
    for (std::size_t i = 2; i < toks.size(); ++i) idx.push_back(parse_size(toks[i], reader));
  };
  read_split("train", ds.train_idx);
  read_split("val", ds.val_idx);
  read_split("test", ds.test_idx);

  auto read_array = [&](const char* tag, std::size_t rows, std::size_t cols) {
    if (!reader.next(line)) reader.fail(std::string("expected '") + tag + "' record");
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != tag) {
      reader.fail(std::string("expected '") + tag + "' record, got '" + line + "'");
    }
    if (toks.size() - 1 != rows * cols) {
      reader.fail(std::string(tag) + " record carries " + std::to_string(toks.size() - 1) +
                  " values, expected " + std::to_string(rows * cols));
    }
    Array a({rows, cols});
    for (std::size_t i = 0; i < rows * cols; ++i) a[i] = parse_double(toks[i + 1], reader);
    return a;
  };

  for (std::size_t s = 0; s < n_samples; ++s) {
    if (!reader.next(line)) reader.fail("expected 'sample " + std::to_string(s) + "'");
    auto toks = split_ws(line);
    if (toks.size() != 2 || toks[0] != "sample" || parse_size(toks[1], reader) != s) {
      reader.fail("expected 'sample " + std::to_string(s) + "', got '" + line + "'");
    }
    Sample smp;

    if (!reader.next(line)) reader.fail("expected 'types' record");
    toks = split_ws(line);
    if (toks.empty() || toks[0] != "types") reader.fail("expected 'types' record");
    if (toks.size() - 1 != n_particles) {
      reader.fail("types record carries " + std::to_string(toks.size() - 1) +
                  " values, expected " + std::to_string(n_particles));
    }
    for (std::size_t i = 1; i < toks.size(); ++i) {
      smp.state.types.push_back(parse_size(toks[i], reader));
    }

    smp.state.features = read_array("features", n_particles, feat_dim);

    if (!reader.next(line)) reader.fail("expected 'edges' record");
    toks = split_ws(line);
    if (toks.size() != 2 || toks[0] != "edges") reader.fail("expected 'edges <count>' record");
    std::size_t n_edges = parse_size(toks[1], reader);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Array attrs({n_edges, edge_attr_dim});
    for (std::size_t e = 0; e < n_edges; ++e) {
      if (!reader.next(line)) reader.fail("expected 'edge' record");
      toks = split_ws(line);
      if (toks.size() != 3 + edge_attr_dim || toks[0] != "edge") {
        reader.fail("malformed edge record '" + line + "'");
      }
      edges.emplace_back(parse_size(toks[1], reader), parse_size(toks[2], reader));
      for (std::size_t c = 0; c < edge_attr_dim; ++c) {
        attrs(e, c) = parse_double(toks[3 + c], reader);
      }
    }
    try {
      smp.state.graph = ObservedGraph(n_particles, std::move(edges), std::move(attrs));
    } catch (const std::exception& ex) {
      reader.fail(ex.what());
    }

    smp.state.positions = read_array("x0", n_particles, 3);
    smp.state.velocities = read_array("v0", n_particles, 3);

    smp.truth.dt = dt;
    smp.truth.start_time = start_time;
    for (std::size_t f = 0; f < n_frames; ++f) {
      if (!reader.next(line)) reader.fail("expected 'frame " + std::to_string(f) + "'");
      toks = split_ws(line);
      if (toks.size() != 2 + n_particles * 3 || toks[0] != "frame" ||
          parse_size(toks[1], reader) != f) {
        reader.fail("malformed frame record '" + toks[0] + " ...'");
      }
      Array frame({n_particles, 3});
      for (std::size_t i = 0; i < n_particles * 3; ++i) {
        frame[i] = parse_double(toks[i + 2], reader);
      }
      smp.truth.frames.push_back(std::move(frame));
    }
    ds.samples.push_back(std::move(smp));
  }

  for (const auto* idx : {&ds.train_idx, &ds.val_idx, &ds.test_idx}) {
    for (std::size_t i : *idx) {
      if (i >= ds.samples.size()) {
        throw io_error("split references sample " + std::to_string(i) + " of " +
                       std::to_string(ds.samples.size()));
      }
    }
  }
  return ds;
}

}  // namespace painet
