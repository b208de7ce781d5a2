#include "tlsf/io.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "tlsf/error.hpp"

namespace tlsf {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw ValidationError(fmt::format("line {}: '{}' is not a number", line, s));
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(std::istream& in, const std::string& what) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (t.header.empty()) {
      t.header = split_csv(line);
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != t.header.size()) {
      throw ValidationError(fmt::format("{}: line {} has {} fields, header has {}", what, lineno, cells.size(),
                                        t.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ValidationError(fmt::format("{}: empty file", what));
  return t;
}

CsvTable read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", p.string()));
  return parse_csv(in, p.string());
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", p.string()));
  return out;
}

// dt from a time column that must advance uniformly.
double uniform_dt(const std::vector<double>& t, const std::string& what) {
  if (t.size() < 2) return 1.0;
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ValidationError(fmt::format("{}: time must increase", what));
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double expect = t[0] + dt * static_cast<double>(i);
    if (std::abs(t[i] - expect) > 1e-6 * std::max(1.0, std::abs(expect))) {
      throw ValidationError(fmt::format("{}: row {} breaks the uniform time step {}", what, i + 1, dt));
    }
  }
  return dt;
}

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(fmt::format("missing key '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(fmt::format("key '{}' has the wrong type", key));
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

Eigen::Vector3d vec3(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(fmt::format("{} must be a list of 3 numbers", what));
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(fmt::format("{} must be a list of 3 numbers", what));
  }
}

Json vec3_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items()) {
    if (!ok.contains(k)) throw ValidationError(fmt::format("{}: unknown key '{}'", what, k));
  }
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid JSON ({})", what, e.what()));
  }
}

}  // namespace

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  auto out = open_out(p);
  out << text;
}

// ---------------------------------------------------------------- models

Json to_json(const SkillModel& m) {
  Json j;
  j["K"] = m.size();
  j["dt"] = m.dt;
  j["horizon"] = m.horizon;
  j["control_cost"] = m.control_cost;
  j["start"] = vec3_json(m.start);
  Json means = Json::array(), covs = Json::array();
  for (std::size_t k = 0; k < m.size(); ++k) {
    means.push_back(vec3_json(m.means[k]));
    Json c = Json::array();
    for (int r = 0; r < 3; ++r) c.push_back(vec3_json(m.covariances[k].row(r).transpose()));
    covs.push_back(std::move(c));
  }
  j["means"] = std::move(means);
  j["covariances"] = std::move(covs);
  j["duration_means"] = m.duration_means;
  j["duration_stds"] = m.duration_stds;
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.transition.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.transition.cols(); ++c) row.push_back(m.transition(r, c));
    a.push_back(std::move(row));
  }
  j["transition"] = std::move(a);
  return j;
}

SkillModel model_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("model must be a JSON object");
  reject_unknown(j, {"K", "dt", "horizon", "control_cost", "start", "means", "covariances", "duration_means",
                     "duration_stds", "transition"},
                 "model");
  SkillModel m;
  const auto k = get<std::size_t>(j, "K");
  m.dt = get<double>(j, "dt");
  m.horizon = get<double>(j, "horizon");
  m.control_cost = get_or<double>(j, "control_cost", m.control_cost);
  m.start = vec3(get<Json>(j, "start"), "start");
  const Json means = get<Json>(j, "means");
  const Json covs = get<Json>(j, "covariances");
  if (!means.is_array() || means.size() != k) throw ValidationError(fmt::format("model: expected {} means", k));
  if (!covs.is_array() || covs.size() != k) throw ValidationError(fmt::format("model: expected {} covariances", k));
  for (std::size_t c = 0; c < k; ++c) {
    m.means.push_back(vec3(means[c], "mean"));
    if (!covs[c].is_array() || covs[c].size() != 3) throw ValidationError("covariance must be 3x3");
    Eigen::Matrix3d s;
    for (int r = 0; r < 3; ++r) s.row(r) = vec3(covs[c][static_cast<std::size_t>(r)], "covariance row").transpose();
    m.covariances.push_back(s);
  }
  m.duration_means = get<std::vector<double>>(j, "duration_means");
  m.duration_stds = get<std::vector<double>>(j, "duration_stds");
  const auto a = get<std::vector<std::vector<double>>>(j, "transition");
  if (a.size() != k) throw ValidationError(fmt::format("model: transition must have {} rows", k));
  m.transition.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < k; ++r) {
    if (a[r].size() != k) throw ValidationError(fmt::format("model: transition row {} must have {} entries", r, k));
    for (std::size_t c = 0; c < k; ++c) m.transition(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c];
  }
  m.validate(true);
  return m;
}

SkillModel load_model(const fs::path& p) {
  try {
    return model_from_json(parse_json(read_text(p), p.string()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

void save_model(const fs::path& p, const SkillModel& m) { write_text(p, to_json(m).dump(2) + "\n"); }

// ------------------------------------------------------- specs and scenes

Json to_json(const Predicate& p) {
  Json j;
  j["channel"] = p.channel;
  switch (p.kind) {
    case MarginKind::kLower:
      j["kind"] = "lower";
      j["lb"] = p.lb;
      break;
    case MarginKind::kUpper:
      j["kind"] = "upper";
      j["ub"] = p.ub;
      break;
    case MarginKind::kBand:
      j["kind"] = "band";
      j["lb"] = p.lb;
      j["ub"] = p.ub;
      break;
    case MarginKind::kThreshold:
      j["kind"] = "threshold";
      j["limit"] = p.limit;
      break;
  }
  return j;
}

Predicate predicate_from_json(const std::string& name, const Json& j) {
  if (!j.is_object()) throw ValidationError(fmt::format("predicate '{}' must be an object", name));
  reject_unknown(j, {"channel", "kind", "lb", "ub", "limit"}, "predicate");
  const auto channel = get<std::string>(j, "channel");
  const auto kind = get<std::string>(j, "kind");
  Predicate p;
  if (kind == "lower") {
    p = Predicate::lower(name, channel, get<double>(j, "lb"));
  } else if (kind == "upper") {
    p = Predicate::upper(name, channel, get<double>(j, "ub"));
  } else if (kind == "band") {
    p = Predicate::band(name, channel, get<double>(j, "lb"), get<double>(j, "ub"));
  } else if (kind == "threshold") {
    p = Predicate::threshold(name, channel, get<double>(j, "limit"));
  } else {
    throw ValidationError(fmt::format("predicate '{}': unknown kind '{}'", name, kind));
  }
  p.validate();
  return p;
}

Json to_json(const RegionSpec& r) {
  return {{"name", r.name},
          {"lower", Json::array({r.x_lb, r.y_lb, r.z_lb})},
          {"upper", Json::array({r.x_ub, r.y_ub, r.z_ub})}};
}

RegionSpec region_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("region must be an object");
  reject_unknown(j, {"name", "lower", "upper"}, "region");
  RegionSpec r = region_of(get<std::string>(j, "name"),
                           Box{vec3(get<Json>(j, "lower"), "region lower"), vec3(get<Json>(j, "upper"), "region upper")});
  r.validate();
  return r;
}

Json to_json(const Scene& s) {
  Json regions = Json::array(), obstacles = Json::array();
  for (const RegionSpec& r : s.regions) regions.push_back(to_json(r));
  for (const Obstacle& o : s.obstacles) {
    obstacles.push_back({{"name", o.name},
                         {"lower", vec3_json(o.box.lower)},
                         {"upper", vec3_json(o.box.upper)},
                         {"stiffness", o.stiffness}});
  }
  return {{"regions", std::move(regions)}, {"obstacles", std::move(obstacles)}};
}

Scene scene_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("scene must be an object");
  reject_unknown(j, {"regions", "obstacles"}, "scene");
  Scene s;
  for (const Json& r : get_or<Json>(j, "regions", Json::array())) s.regions.push_back(region_from_json(r));
  for (const Json& o : get_or<Json>(j, "obstacles", Json::array())) {
    reject_unknown(o, {"name", "lower", "upper", "stiffness"}, "obstacle");
    s.obstacles.push_back({get_or<std::string>(o, "name", fmt::format("obstacle{}", s.obstacles.size())),
                           Box{vec3(get<Json>(o, "lower"), "obstacle lower"), vec3(get<Json>(o, "upper"), "obstacle upper")},
                           get_or<double>(o, "stiffness", 500.0)});
  }
  s.validate();
  return s;
}

Json to_json(const LayoutSpec& l) {
  Json t = Json::array();
  for (const auto& [i, jj] : l.transitions) t.push_back(Json::array({i, jj}));
  return {{"means", l.means}, {"durations", l.durations}, {"transitions", std::move(t)}};
}

LayoutSpec layout_from_json(const Json& j, std::size_t k) {
  if (!j.is_object()) throw ValidationError("layout must be an object");
  reject_unknown(j, {"means", "durations", "transitions"}, "layout");
  LayoutSpec l;
  const auto pick = [&](const char* key, std::vector<std::size_t>& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "all") {
      for (std::size_t c = 0; c < k; ++c) out.push_back(c);
    } else {
      out = get<std::vector<std::size_t>>(j, key);
    }
  };
  pick("means", l.means);
  pick("durations", l.durations);
  if (j.contains("transitions")) {
    const Json& t = j.at("transitions");
    if (t.is_string()) {
      const auto name = t.get<std::string>();
      if (name == "reduced") {
        l.transitions = reduced_transition_layout(k).transitions;
      } else if (name == "full") {
        l.transitions = full_transition_layout(k).transitions;
      } else {
        throw ValidationError(fmt::format("layout: unknown transition set '{}'", name));
      }
    } else {
      for (const auto& pair : get<std::vector<std::vector<std::size_t>>>(j, "transitions")) {
        if (pair.size() != 2) throw ValidationError("layout: transitions are [row, column] pairs");
        l.transitions.emplace_back(pair[0], pair[1]);
      }
    }
  }
  return l;
}

Formula StlSpec::formula() const {
  FormulaTable aliases;
  for (const RegionSpec& r : regions) aliases.emplace(r.name, region_to_formula(r));
  return parse_stl(stl, predicates, aliases);
}

StlSpec stl_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("STL spec must be an object");
  reject_unknown(j, {"stl", "predicates", "regions"}, "STL spec");
  StlSpec s;
  s.stl = get<std::string>(j, "stl");
  const Json preds = get_or<Json>(j, "predicates", Json::object());
  for (const auto& [name, p] : preds.items()) {
    s.predicates.emplace(name, predicate_from_json(name, p));
  }
  for (const Json& r : get_or<Json>(j, "regions", Json::array())) s.regions.push_back(region_from_json(r));
  return s;
}

Json to_json(const StlSpec& s) {
  Json preds = Json::object();
  for (const auto& [name, p] : s.predicates) preds[name] = to_json(p);
  Json regions = Json::array();
  for (const RegionSpec& r : s.regions) regions.push_back(to_json(r));
  Json j{{"stl", s.stl}, {"predicates", std::move(preds)}};
  if (!s.regions.empty()) j["regions"] = std::move(regions);
  return j;
}

StlSpec load_stl_spec(const fs::path& p) {
  try {
    return stl_spec_from_json(parse_json(read_text(p), p.string()));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

// ------------------------------------------------------------ experiments

Experiment experiment_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("experiment must be a JSON object");
  reject_unknown(j, {"name", "model", "scene", "stl", "predicates", "layout", "bo", "robustness", "mean_bound_sigmas",
                     "events"},
                 "experiment");
  Experiment e;
  e.name = get_or<std::string>(j, "name", "experiment");

  const Json model = get<Json>(j, "model");
  const auto one_model = [&](const Json& m) {
    if (m.is_string()) {
      fs::path p = m.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return load_model(p);
    }
    return model_from_json(m);
  };
  if (model.is_array()) {
    for (const Json& m : model) e.skills.push_back(one_model(m));
  } else {
    e.skills.push_back(one_model(model));
  }

  e.scene = scene_from_json(get_or<Json>(j, "scene", Json::object()));
  e.stl = get<std::string>(j, "stl");
  const Json preds = get_or<Json>(j, "predicates", Json::object());
  for (const auto& [name, p] : preds.items()) {
    e.predicates.emplace(name, predicate_from_json(name, p));
  }

  const Json layout = get<Json>(j, "layout");
  if (layout.is_array()) {
    if (layout.size() > e.skills.size()) throw ValidationError("layout lists more skills than the model chain");
    for (std::size_t s = 0; s < layout.size(); ++s) e.layout.push_back(layout_from_json(layout[s], e.skills[s].size()));
  } else {
    e.layout.push_back(layout_from_json(layout, e.skills.front().size()));
  }

  if (j.contains("bo")) {
    const Json& b = j.at("bo");
    reject_unknown(b, {"N", "M", "xi", "seed", "acquisition_samples", "refine_steps"}, "bo");
    e.bo.iterations = get_or<std::size_t>(b, "N", e.bo.iterations);
    e.bo.random_init = get_or<std::size_t>(b, "M", e.bo.random_init);
    e.bo.xi = get_or<double>(b, "xi", e.bo.xi);
    e.bo.seed = get_or<std::uint64_t>(b, "seed", e.bo.seed);
    e.bo.acquisition_samples = get_or<std::size_t>(b, "acquisition_samples", e.bo.acquisition_samples);
    e.bo.refine_steps = get_or<std::size_t>(b, "refine_steps", e.bo.refine_steps);
  }
  if (j.contains("robustness")) {
    const Json& r = j.at("robustness");
    reject_unknown(r, {"semantics", "nu"}, "robustness");
    if (r.contains("semantics")) e.robustness.semantics = parse_semantics(get<std::string>(r, "semantics"));
    e.robustness.nu = get_or<double>(r, "nu", e.robustness.nu);
  }
  e.mean_sigmas = get_or<double>(j, "mean_bound_sigmas", e.mean_sigmas);
  if (j.contains("events")) e.events = get<std::map<std::string, double>>(j, "events");
  e.validate();
  return e;
}

Json to_json(const Experiment& e) {
  Json j;
  j["name"] = e.name;
  if (e.skills.size() == 1) {
    j["model"] = to_json(e.skills.front());
  } else {
    Json models = Json::array();
    for (const SkillModel& m : e.skills) models.push_back(to_json(m));
    j["model"] = std::move(models);
  }
  j["scene"] = to_json(e.scene);
  j["stl"] = e.stl;
  Json preds = Json::object();
  for (const auto& [name, p] : e.predicates) preds[name] = to_json(p);
  j["predicates"] = std::move(preds);
  if (e.layout.size() == 1) {
    j["layout"] = to_json(e.layout.front());
  } else {
    Json l = Json::array();
    for (const LayoutSpec& s : e.layout) l.push_back(to_json(s));
    j["layout"] = std::move(l);
  }
  j["bo"] = {{"N", e.bo.iterations},
             {"M", e.bo.random_init},
             {"xi", e.bo.xi},
             {"seed", e.bo.seed},
             {"acquisition_samples", e.bo.acquisition_samples},
             {"refine_steps", e.bo.refine_steps}};
  j["robustness"] = {{"semantics", to_string(e.robustness.semantics)}, {"nu", e.robustness.nu}};
  j["mean_bound_sigmas"] = e.mean_sigmas;
  if (!e.events.empty()) j["events"] = e.events;
  return j;
}

Experiment load_experiment(const fs::path& p) {
  try {
    return experiment_from_json(parse_json(read_text(p), p.string()), p.parent_path());
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

void save_experiment(const fs::path& p, const Experiment& e) { write_text(p, to_json(e).dump(2) + "\n"); }

std::uint64_t config_digest(const Experiment& e) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(e).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// -------------------------------------------------------------------- CSV

Signal parse_signal_csv(std::istream& in) {
  const CsvTable t = parse_csv(in, "signal");
  if (t.header.front() != "t") throw ValidationError("signal: first column must be 't'");
  if (t.header.size() < 2) throw ValidationError("signal: no channels");
  if (t.rows.empty()) throw ValidationError("signal: no samples");
  std::vector<double> time;
  for (const auto& r : t.rows) time.push_back(r[0]);
  Signal s(uniform_dt(time, "signal"));
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (const auto& r : t.rows) v.push_back(r[c]);
    s.add_channel(t.header[c], std::move(v));
  }
  s.validate();
  return s;
}

Signal read_signal_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", p.string()));
  try {
    return parse_signal_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

void write_signal_csv(std::ostream& out, const Signal& s) {
  out << "t";
  for (const auto& n : s.channel_names()) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << num(s.dt() * static_cast<double>(i));
    for (const auto& n : s.channel_names()) out << ',' << num(s.channel(n)[i]);
    out << '\n';
  }
}

void write_signal_csv(const fs::path& p, const Signal& s) {
  auto out = open_out(p);
  write_signal_csv(out, s);
}

void write_trajectory_csv(const fs::path& p, std::span<const Trajectory> chain) {
  auto out = open_out(p);
  out << "t,x,y,z,vx,vy,vz,state\n";
  std::size_t i = 0;
  for (const Trajectory& tr : chain) {
    for (std::size_t k = 0; k < tr.size(); ++k, ++i) {
      const auto& x = tr.positions[k];
      const auto& v = tr.velocities[k];
      out << num(tr.dt * static_cast<double>(i)) << ',' << num(x.x()) << ',' << num(x.y()) << ',' << num(x.z())
          << ',' << num(v.x()) << ',' << num(v.y()) << ',' << num(v.z()) << ',' << tr.states[k] << '\n';
    }
  }
}

std::vector<Trajectory> read_trajectory_csv(const fs::path& p) {
  const CsvTable t = read_csv(p);
  const std::vector<std::string> want{"t", "x", "y", "z", "vx", "vy", "vz", "state"};
  if (t.header != want) throw ValidationError(fmt::format("{}: expected header t,x,y,z,vx,vy,vz,state", p.string()));
  if (t.rows.empty()) throw ValidationError(fmt::format("{}: no samples", p.string()));
  std::vector<double> time;
  for (const auto& r : t.rows) time.push_back(r[0]);
  Trajectory tr;
  tr.dt = uniform_dt(time, p.string());
  for (const auto& r : t.rows) {
    tr.positions.emplace_back(r[1], r[2], r[3]);
    tr.velocities.emplace_back(r[4], r[5], r[6]);
    if (r[7] < 0.0 || r[7] != std::floor(r[7])) throw ValidationError("trajectory state must be a component index");
    tr.states.push_back(static_cast<std::size_t>(r[7]));
  }
  return {std::move(tr)};
}

Demonstration read_demo_csv(const fs::path& p) {
  const CsvTable t = read_csv(p);
  const std::vector<std::string> want{"t", "x", "y", "z"};
  if (t.header != want) throw ValidationError(fmt::format("{}: expected header t,x,y,z", p.string()));
  if (t.rows.size() < 2) throw ValidationError(fmt::format("{}: a demonstration needs at least two samples", p.string()));
  std::vector<double> time;
  for (const auto& r : t.rows) time.push_back(r[0]);
  Demonstration d;
  d.dt = uniform_dt(time, p.string());
  for (const auto& r : t.rows) d.positions.emplace_back(r[1], r[2], r[3]);
  return d;
}

void write_demo_csv(const fs::path& p, const Demonstration& d) {
  auto out = open_out(p);
  out << "t,x,y,z\n";
  for (std::size_t i = 0; i < d.positions.size(); ++i) {
    const auto& x = d.positions[i];
    out << num(d.dt * static_cast<double>(i)) << ',' << num(x.x()) << ',' << num(x.y()) << ',' << num(x.z()) << '\n';
  }
}

void write_trace_csv(const fs::path& p, const OptimizationTrace& t) {
  auto out = open_out(p);
  out << "iter,reward,best_reward,wall_ms";
  const std::size_t dim = t.empty() ? 0 : t.observations.front().x.size();
  for (std::size_t d = 0; d < dim; ++d) out << ",delta_" << d;
  out << '\n';
  const auto best = t.best_so_far();
  for (std::size_t i = 0; i < t.observations.size(); ++i) {
    const Observation& o = t.observations[i];
    out << i << ',' << num(o.reward) << ',' << num(best[i]) << ',' << fmt::format("{:.3f}", o.wall_ms);
    for (double v : o.x) out << ',' << num(v);
    out << '\n';
  }
}

OptimizationTrace read_trace_csv(const fs::path& p) {
  const CsvTable t = read_csv(p);
  if (t.header.size() < 4 || t.header[0] != "iter" || t.header[1] != "reward" || t.header[2] != "best_reward" ||
      t.header[3] != "wall_ms") {
    throw ValidationError(fmt::format("{}: not a trace file", p.string()));
  }
  OptimizationTrace tr;
  for (const auto& r : t.rows) {
    Observation o;
    o.reward = r[1];
    o.wall_ms = r[3];
    o.x.assign(r.begin() + 4, r.end());
    tr.observations.push_back(std::move(o));
    if (tr.observations.back().reward > tr.observations[tr.best].reward) tr.best = tr.observations.size() - 1;
  }
  return tr;
}

void write_params_csv(const fs::path& p, const ParameterLayout& layout, std::span<const double> values) {
  if (values.size() != layout.size()) throw ValidationError("parameter count does not match the layout");
  auto out = open_out(p);
  out << "param,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << layout.label(i) << ',' << num(values[i]) << '\n';
}

std::vector<double> read_params_csv(const fs::path& p, const ParameterLayout& layout) {
  std::ifstream in(p);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", p.string()));
  std::string first;
  std::getline(in, first);
  if (split_csv(first).front() == "iter") {
    const OptimizationTrace t = read_trace_csv(p);
    if (t.empty()) throw ValidationError(fmt::format("{}: trace has no rows", p.string()));
    if (t.best_observation().x.size() != layout.size()) {
      throw ValidationError(fmt::format("{}: trace has {} parameters, layout has {}", p.string(),
                                        t.best_observation().x.size(), layout.size()));
    }
    return t.best_observation().x;
  }
  const auto head = split_csv(first);
  if (head.size() != 2 || head[0] != "param" || head[1] != "value") {
    throw ValidationError(fmt::format("{}: expected a 'param,value' header or a trace file", p.string()));
  }
  std::vector<double> v;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw ValidationError(fmt::format("{}: line {} needs two fields", p.string(), lineno));
    if (v.size() >= layout.size() || cells[0] != layout.label(v.size())) {
      throw ValidationError(fmt::format("{}: line {}: parameter '{}' does not match the layout", p.string(), lineno,
                                        cells[0]));
    }
    v.push_back(parse_double(cells[1], lineno));
  }
  if (v.size() != layout.size()) {
    throw ValidationError(fmt::format("{}: {} parameters, layout has {}", p.string(), v.size(), layout.size()));
  }
  return v;
}

ParameterVector read_labeled_params(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", p.string()));
  std::string line;
  std::getline(in, line);
  const auto head = split_csv(line);
  if (head.size() != 2 || head[0] != "param" || head[1] != "value") {
    throw ValidationError(fmt::format("{}: expected a 'param,value' header", p.string()));
  }
  std::vector<std::string> labels;
  ParameterVector pv;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw ValidationError(fmt::format("{}: line {} needs two fields", p.string(), lineno));
    labels.push_back(cells[0]);
    pv.values.push_back(parse_double(cells[1], lineno));
  }
  pv.layout = ParameterLayout::from_labels(labels);
  return pv;
}

}  // namespace tlsf
