#include "bce/harness/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bce::harness {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& path, std::size_t line, const std::string& cell,
                    const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    fail(path, line, "cannot parse value '" + cell + "' in column " + column);
  }
}

// Maps required column names to indices; throws when one is missing.
class Header {
 public:
  Header(const std::string& path, const std::string& line,
         const std::vector<std::string>& required) {
    const std::vector<std::string> names = split_row(line);
    for (std::size_t i = 0; i < names.size(); ++i) index_[names[i]] = i;
    for (const std::string& name : required) {
      if (index_.count(name) == 0) {
        throw std::runtime_error(path + ":1: missing column '" + name + "'");
      }
    }
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  const std::string& cell(const std::string& path, std::size_t line,
                          const std::vector<std::string>& cells, const std::string& name) const {
    const std::size_t i = index_.at(name);
    if (i >= cells.size()) fail(path, line, "row has too few cells for column " + name);
    return cells[i];
  }

 private:
  std::map<std::string, std::size_t> index_;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

std::size_t ObservationSet::total_rows() const {
  std::size_t n = 0;
  for (const auto& epoch : observations) n += epoch.size();
  return n;
}

ObservationSet to_observation_set(const gnss::Scenario& scenario) {
  return {scenario.epochs, scenario.satellites, scenario.observations};
}

TruthSet to_truth_set(const gnss::Scenario& scenario) {
  TruthSet t;
  t.epochs = scenario.epochs;
  t.positions_ecef = scenario.truth_positions_ecef;
  t.clock_m = scenario.truth_clock_m;
  t.tropo_wet_m.assign(scenario.epochs.size(), scenario.truth_tropo_wet_m);
  return t;
}

void write_observations_csv(const std::string& path, const ObservationSet& obs) {
  std::ofstream out = open_out(path);
  out << "epoch_s,sat_id,sat_x_m,sat_y_m,sat_z_m,sat_clock_m,elevation_rad,cn0_dbhz,"
         "pseudorange_m,carrier_phase_m,contaminated\n";
  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    for (std::size_t i = 0; i < obs.observations[k].size(); ++i) {
      const gnss::SatelliteState& s = obs.satellites[k][i];
      const gnss::EpochObservation& o = obs.observations[k][i];
      out << fmt(o.epoch_s) << ',' << o.sat_id << ',' << fmt(s.position.x()) << ','
          << fmt(s.position.y()) << ',' << fmt(s.position.z()) << ',' << fmt(s.clock_bias_m)
          << ',' << fmt(s.elevation_rad) << ',' << fmt(s.cn0_dbhz) << ','
          << fmt(o.pseudorange_m) << ',' << fmt(o.carrier_phase_m) << ',' << o.contaminated
          << '\n';
    }
  }
}

void write_truth_csv(const std::string& path, const TruthSet& truth) {
  std::ofstream out = open_out(path);
  out << "epoch_s,x_m,y_m,z_m,clock_m,tropo_wet_m\n";
  for (std::size_t k = 0; k < truth.epochs.size(); ++k) {
    out << fmt(truth.epochs[k]) << ',' << fmt(truth.positions_ecef[k].x()) << ','
        << fmt(truth.positions_ecef[k].y()) << ',' << fmt(truth.positions_ecef[k].z()) << ','
        << fmt(truth.clock_m[k]) << ',' << fmt(truth.tropo_wet_m[k]) << '\n';
  }
}

ObservationSet load_observations(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": no epochs");
  const Header header(path, line,
                      {"epoch_s", "sat_id", "sat_x_m", "sat_y_m", "sat_z_m", "sat_clock_m",
                       "elevation_rad", "cn0_dbhz", "pseudorange_m", "carrier_phase_m"});

  ObservationSet out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    auto get = [&](const char* name) { return header.cell(path, line_no, cells, name); };

    gnss::SatelliteState sat;
    sat.sat_id = get("sat_id");
    sat.position = Vec3(parse_double(path, line_no, get("sat_x_m"), "sat_x_m"),
                        parse_double(path, line_no, get("sat_y_m"), "sat_y_m"),
                        parse_double(path, line_no, get("sat_z_m"), "sat_z_m"));
    sat.clock_bias_m = parse_double(path, line_no, get("sat_clock_m"), "sat_clock_m");
    sat.elevation_rad = parse_double(path, line_no, get("elevation_rad"), "elevation_rad");
    sat.cn0_dbhz = parse_double(path, line_no, get("cn0_dbhz"), "cn0_dbhz");

    gnss::EpochObservation o;
    o.epoch_s = parse_double(path, line_no, get("epoch_s"), "epoch_s");
    o.sat_id = sat.sat_id;
    o.pseudorange_m = parse_double(path, line_no, get("pseudorange_m"), "pseudorange_m");
    o.carrier_phase_m = parse_double(path, line_no, get("carrier_phase_m"), "carrier_phase_m");
    if (!std::isfinite(o.pseudorange_m) || !std::isfinite(o.carrier_phase_m)) {
      fail(path, line_no, "non-finite observation");
    }
    o.contaminated = -1;
    if (header.has("contaminated")) {
      const std::string& c = get("contaminated");
      if (c != "0" && c != "1") fail(path, line_no, "contaminated must be 0 or 1");
      o.contaminated = c == "1" ? 1 : 0;
    }

    if (out.epochs.empty() || out.epochs.back() != o.epoch_s) {
      if (!out.epochs.empty() && o.epoch_s < out.epochs.back()) {
        fail(path, line_no, "epochs must be non-decreasing");
      }
      out.epochs.push_back(o.epoch_s);
      out.satellites.emplace_back();
      out.observations.emplace_back();
    }
    out.satellites.back().push_back(std::move(sat));
    out.observations.back().push_back(std::move(o));
  }
  if (out.epochs.empty()) throw std::runtime_error(path + ": no epochs");
  return out;
}

TruthSet load_truth(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": no epochs");
  const Header header(path, line, {"epoch_s", "x_m", "y_m", "z_m", "clock_m", "tropo_wet_m"});

  TruthSet out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    auto get = [&](const char* name) { return header.cell(path, line_no, cells, name); };
    out.epochs.push_back(parse_double(path, line_no, get("epoch_s"), "epoch_s"));
    out.positions_ecef.emplace_back(parse_double(path, line_no, get("x_m"), "x_m"),
                                    parse_double(path, line_no, get("y_m"), "y_m"),
                                    parse_double(path, line_no, get("z_m"), "z_m"));
    out.clock_m.push_back(parse_double(path, line_no, get("clock_m"), "clock_m"));
    out.tropo_wet_m.push_back(parse_double(path, line_no, get("tropo_wet_m"), "tropo_wet_m"));
  }
  if (out.epochs.empty()) throw std::runtime_error(path + ": no epochs");
  return out;
}

}  // namespace bce::harness
