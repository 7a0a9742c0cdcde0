#include "backsolve/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "backsolve/oracle.hpp"

namespace backsolve {

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) items.push_back(Trim(item));
  return items;
}

[[noreturn]] void Fail(int line, const std::string& key,
                       const std::string& message) {
  throw std::invalid_argument("line " + std::to_string(line) + ": key '" + key +
                              "': " + message);
}

// Accepts decimal numbers and fractions a/b.
double ParseReal(const std::string& text, int line, const std::string& key) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double num = ParseReal(Trim(text.substr(0, slash)), line, key);
    const double den = ParseReal(Trim(text.substr(slash + 1)), line, key);
    if (den == 0.0) Fail(line, key, "division by zero in '" + text + "'");
    return num / den;
  }
  if (text.empty()) Fail(line, key, "missing number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    Fail(line, key, "malformed number '" + text + "'");
  }
  return v;
}

long long ParseInteger(const std::string& text, int line,
                       const std::string& key) {
  if (text.empty()) Fail(line, key, "missing integer");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) {
    Fail(line, key, "malformed integer '" + text + "'");
  }
  return v;
}

std::vector<double> ParseRealList(const std::string& value, int line,
                                  const std::string& key) {
  std::vector<double> out;
  for (const auto& item : SplitList(value)) {
    out.push_back(ParseReal(item, line, key));
  }
  return out;
}

// "1, 2, 3" or "1..4".
std::vector<int> ParseIntRange(const std::string& value, int line,
                               const std::string& key) {
  std::vector<int> out;
  const auto dots = value.find("..");
  if (dots != std::string::npos) {
    const long long a = ParseInteger(Trim(value.substr(0, dots)), line, key);
    const long long b = ParseInteger(Trim(value.substr(dots + 2)), line, key);
    if (b < a) Fail(line, key, "empty range '" + value + "'");
    for (long long k = a; k <= b; ++k) out.push_back(static_cast<int>(k));
    return out;
  }
  for (const auto& item : SplitList(value)) {
    out.push_back(static_cast<int>(ParseInteger(item, line, key)));
  }
  return out;
}

const std::map<std::string, ExperimentKind>& ExperimentNames() {
  static const std::map<std::string, ExperimentKind> names{
      {"convergence", ExperimentKind::kConvergence},
      {"interval-length", ExperimentKind::kIntervalLength},
      {"perturb-random", ExperimentKind::kPerturbRandom},
      {"perturb-mode", ExperimentKind::kPerturbMode},
      {"infsup", ExperimentKind::kInfSup},
      {"stability-oracle", ExperimentKind::kStabilityOracle},
  };
  return names;
}

std::string StrategyName(EpsilonStrategy s) {
  switch (s) {
    case EpsilonStrategy::kPlain:
      return "plain";
    case EpsilonStrategy::kDataAware:
      return "data-aware";
    case EpsilonStrategy::kExplicit:
      return "explicit";
  }
  return "?";
}

bool IsSolveExperiment(ExperimentKind kind) {
  return kind == ExperimentKind::kConvergence ||
         kind == ExperimentKind::kIntervalLength ||
         kind == ExperimentKind::kPerturbRandom ||
         kind == ExperimentKind::kPerturbMode;
}

}  // namespace

std::string ExperimentName(ExperimentKind kind) {
  for (const auto& [name, value] : ExperimentNames()) {
    if (value == kind) return name;
  }
  return "?";
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::map<std::string, int> key_line;
  std::istringstream stream(text);
  std::string raw;
  int line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = Trim(raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line) +
                                  ": expected 'key = value'");
    }
    const std::string key = Trim(content.substr(0, eq));
    const std::string value = Trim(content.substr(eq + 1));
    if (!seen.insert(key).second) Fail(line, key, "given twice");
    key_line[key] = line;

    if (key == "experiment") {
      const auto it = ExperimentNames().find(value);
      if (it == ExperimentNames().end()) {
        Fail(line, key, "unknown experiment '" + value + "'");
      }
      config.experiment = it->second;
    } else if (key == "d") {
      config.d = static_cast<int>(ParseInteger(value, line, key));
    } else if (key == "T") {
      config.T = ParseReal(value, line, key);
    } else if (key == "L") {
      config.L = ParseReal(value, line, key);
    } else if (key == "k_range") {
      config.k_range = ParseIntRange(value, line, key);
    } else if (key == "l") {
      config.l = static_cast<int>(ParseInteger(value, line, key));
    } else if (key == "time_level_offset") {
      config.time_level_offset = static_cast<int>(ParseInteger(value, line, key));
    } else if (key == "epsilon_strategy") {
      if (value == "plain") {
        config.epsilon_strategy = EpsilonStrategy::kPlain;
      } else if (value == "data-aware") {
        config.epsilon_strategy = EpsilonStrategy::kDataAware;
      } else if (value == "explicit") {
        config.epsilon_strategy = EpsilonStrategy::kExplicit;
      } else {
        Fail(line, key, "expected plain, data-aware or explicit");
      }
    } else if (key == "epsilon_values") {
      config.epsilon_values = ParseRealList(value, line, key);
    } else if (key == "solution") {
      config.solution = value;
    } else if (key == "seed") {
      const long long seed = ParseInteger(value, line, key);
      if (seed < 0) Fail(line, key, "must be nonnegative");
      config.seed = static_cast<uint64_t>(seed);
    } else if (key == "target_norm") {
      config.target_norm = ParseReal(value, line, key);
    } else if (key == "mode_n") {
      config.mode_n = static_cast<int>(ParseInteger(value, line, key));
    } else if (key == "amplitude") {
      config.amplitude = ParseReal(value, line, key);
    } else if (key == "slice_times") {
      config.slice_times = ParseRealList(value, line, key);
    } else if (key == "stopping_rule") {
      if (value == "consistent") {
        config.stopping_rule = StoppingRule::kConsistent;
      } else if (value == "loose") {
        config.stopping_rule = StoppingRule::kLoose;
      } else {
        Fail(line, key, "expected consistent or loose");
      }
    } else if (key == "threshold") {
      config.threshold = ParseReal(value, line, key);
      if (!(*config.threshold > 0.0)) Fail(line, key, "must be positive");
    } else if (key == "betas") {
      config.betas = ParseRealList(value, line, key);
    } else if (key == "output_path") {
      config.output_path = value;
    } else {
      Fail(line, key, "unknown key");
    }
  }

  for (const char* required : {"experiment", "d", "T", "k_range"}) {
    if (!seen.count(required)) {
      throw std::invalid_argument(std::string("missing required key '") +
                                  required + "'");
    }
  }
  auto where = [&](const std::string& key) {
    return key_line.count(key) ? key_line[key] : 0;
  };
  if (config.d != 1 && config.d != 2) {
    Fail(where("d"), "d", "only d = 1 and d = 2 are supported");
  }
  if (!(config.T > 0.0)) Fail(where("T"), "T", "must be positive");
  const double L = config.interval_length();
  if (!(L > 0.0) || L > config.T * (1.0 + 1e-12)) {
    Fail(where("L"), "L", "must lie in (0, T]");
  }
  if (config.k_range.empty()) Fail(where("k_range"), "k_range", "empty");
  for (size_t i = 0; i < config.k_range.size(); ++i) {
    if (config.k_range[i] < 0) Fail(where("k_range"), "k_range", "negative k");
    if (i > 0 && config.k_range[i] <= config.k_range[i - 1]) {
      Fail(where("k_range"), "k_range", "must be strictly ascending");
    }
  }
  if (config.l != 0 && config.l != 1) Fail(where("l"), "l", "must be 0 or 1");
  if (config.time_level_offset < 0) {
    Fail(where("time_level_offset"), "time_level_offset", "must be >= 0");
  }
  if (config.epsilon_strategy == EpsilonStrategy::kExplicit) {
    if (config.epsilon_values.size() != config.k_range.size()) {
      Fail(where("epsilon_values"), "epsilon_values",
           "need one value per entry of k_range (" +
               std::to_string(config.k_range.size()) + ")");
    }
    for (double e : config.epsilon_values) {
      if (e < 0.0) Fail(where("epsilon_values"), "epsilon_values", "negative");
    }
  } else if (!config.epsilon_values.empty()) {
    Fail(where("epsilon_values"), "epsilon_values",
         "only allowed with epsilon_strategy = explicit");
  }
  if (IsSolveExperiment(config.experiment)) {
    try {
      ManufacturedByName(config.solution, config.d);
    } catch (const std::invalid_argument&) {
      Fail(where("solution"), "solution",
           "unknown solution '" + config.solution + "'");
    }
  }
  if (config.slice_times.empty()) {
    const double T = config.T;
    config.slice_times = {T / 4, T / 2, 3 * T / 4, T};
    // Keep the defaults inside a shortened interval.
    if (L < T) {
      config.slice_times.erase(
          std::remove_if(config.slice_times.begin(), config.slice_times.end(),
                         [&](double t) { return t < T - L - 1e-12; }),
          config.slice_times.end());
    }
  }
  for (double t : config.slice_times) {
    if (t < config.T - L - 1e-12 || t > config.T + 1e-12) {
      Fail(where("slice_times"), "slice_times", "times must lie in [T - L, T]");
    }
  }
  if (config.experiment == ExperimentKind::kPerturbRandom &&
      !(config.target_norm > 0.0)) {
    Fail(where("target_norm"), "target_norm", "must be positive");
  }
  if (config.experiment == ExperimentKind::kPerturbMode) {
    if (config.d != 2) Fail(where("d"), "d", "perturb-mode needs d = 2");
    if (config.mode_n < 1) Fail(where("mode_n"), "mode_n", "must be >= 1");
  }
  for (double b : config.betas) {
    if (b < 0.0 || b >= 1.0) Fail(where("betas"), "betas", "need 0 <= beta < 1");
  }
  return config;
}

size_t ResultTable::Column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw std::out_of_range("ResultTable: no column '" + name + "'");
  }
  return static_cast<size_t>(it - columns.begin());
}

double ResultTable::Number(size_t row, const std::string& name) const {
  const CellValue& v = rows.at(row).at(Column(name));
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
  throw std::invalid_argument("ResultTable: column '" + name + "' is text");
}

std::string ResultTable::Text(size_t row, const std::string& name) const {
  const CellValue& v = rows.at(row).at(Column(name));
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw std::invalid_argument("ResultTable: column '" + name + "' is numeric");
}

std::string SliceColumn(double t) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "err_slice@%.6g", t);
  return buffer;
}

namespace {

struct LevelMeshes {
  TimeMesh time;
  SpatialMesh space;
};

LevelMeshes BuildMeshes(const ExperimentConfig& config, int k) {
  const double T = config.T;
  const double L = config.interval_length();
  TimeMesh full = UniformTimeMesh(0.0, T, k + config.time_level_offset);
  TimeMesh time = L < T ? full.Restrict(T - L, T) : full;
  SpatialMesh space = config.d == 2
                          ? RefineUniform(UnitSquareInitial(), 2 * k)
                          : RefineUniform(UnitIntervalMesh(1), k);
  return {std::move(time), std::move(space)};
}

double SnapToBreakpoint(const TimeMesh& mesh, double t, std::ostream* log,
                        std::mutex& log_mutex) {
  const auto& points = mesh.breakpoints();
  double best = points.front();
  for (double p : points) {
    if (std::abs(p - t) < std::abs(best - t)) best = p;
  }
  if (std::abs(best - t) > 1e-12 * std::max(1.0, std::abs(t)) && log) {
    std::lock_guard<std::mutex> lock(log_mutex);
    char buffer[160];
    std::snprintf(buffer, sizeof(buffer),
                  "warning: slice time %.6g snapped to breakpoint %.6g\n", t,
                  best);
    *log << buffer;
  }
  return best;
}

std::vector<std::vector<CellValue>> SolveLevel(const ExperimentConfig& config,
                                               size_t index, std::ostream* log,
                                               std::mutex& log_mutex) {
  const int k = config.k_range[index];
  LevelMeshes meshes = BuildMeshes(config, k);
  const ManufacturedSolution exact = ManufacturedByName(config.solution, config.d);
  const LagrangeSpace space(meshes.space, {1, true});
  if (space.size() == 0) {
    throw std::invalid_argument("spatial mesh has no interior vertices");
  }
  const double T = config.T;
  const int quad_order = 6;
  const auto g_exact = [&](const Vertex& x) { return exact.u(T, x); };

  EndTimeData g;
  double pert_norm = 0.0;
  if (config.experiment == ExperimentKind::kPerturbRandom) {
    g = EndTimeData::FromFunction(space, g_exact, quad_order + 2);
    const SparseMatrix mass = SpaceMass(meshes.space, {1, true});
    g.AddFiniteElement(
        RandomPerturbation(mass, config.target_norm, config.seed + k), mass);
    pert_norm = config.target_norm;
  } else if (config.experiment == ExperimentKind::kPerturbMode) {
    const SpectralField pert =
        ModePerturbation(config.mode_n, T, config.amplitude);
    g = EndTimeData::FromFunction(
        space, [&](const Vertex& x) { return g_exact(x) + pert.Evaluate(x); },
        quad_order + 2);
    pert_norm = HbetaNorm(pert, 0.0);
  } else {
    g = EndTimeData::FromFunction(space, g_exact, quad_order + 2);
  }

  std::vector<EpsilonStrategy> strategies{config.epsilon_strategy};
  if (config.experiment == ExperimentKind::kPerturbRandom ||
      config.experiment == ExperimentKind::kPerturbMode) {
    strategies = {EpsilonStrategy::kPlain, EpsilonStrategy::kDataAware};
  }
  std::vector<double> slices;
  for (double t : config.slice_times) {
    slices.push_back(SnapToBreakpoint(meshes.time, t, log, log_mutex));
  }

  const long long dofs =
      static_cast<long long>(meshes.time.num_nodes()) * space.size();
  std::vector<std::vector<CellValue>> rows;
  for (EpsilonStrategy strategy : strategies) {
    BackwardProblem problem{meshes.time, meshes.space};
    problem.l = config.l;
    problem.reg_epsilon = ChooseEpsilon(
        strategy, dofs, config.d, pert_norm,
        strategy == EpsilonStrategy::kExplicit ? config.epsilon_values[index]
                                               : 0.0);
    problem.f = exact.f;
    problem.g = g;
    problem.exact = exact;
    problem.data_error = pert_norm;
    problem.slice_times = slices;
    problem.quad_order = quad_order;
    problem.stopping_rule = config.stopping_rule;
    problem.threshold = config.threshold;
    const BackwardResult result = SolveBackward(problem);
    std::vector<CellValue> row{
        static_cast<long long>(k),
        dofs,
        StrategyName(strategy),
        problem.reg_epsilon,
        static_cast<long long>(result.report.iterations),
        result.report.stopping_value,
        result.report.threshold,
        static_cast<long long>(result.report.converged ? 1 : 0),
        result.errors->l2l2,
        result.errors->l2h1,
    };
    for (double t : slices) row.push_back(result.errors->l2_slices.at(t));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<CellValue>> InfSupLevel(const ExperimentConfig& config,
                                                size_t index) {
  const int k = config.k_range[index];
  const LevelMeshes meshes = BuildMeshes(config, k);
  const SpaceTimeDiscretization disc(meshes.time, meshes.space, config.l);
  const double gamma = InfSupConstant(meshes.time, meshes.space, config.l, 1);
  return {{static_cast<long long>(k),
           static_cast<long long>(disc.trial_size()), gamma}};
}

std::vector<std::vector<CellValue>> OracleLevel(const ExperimentConfig& config,
                                                size_t index) {
  // Mode index n = k; the single mode has unit coefficient at t = 0.
  const int n = config.k_range[index];
  if (n < 1) throw std::invalid_argument("mode index must be >= 1");
  const double T = config.T;
  SpectralField single(config.d);
  single.AddMode({n, n, n}, 1.0);
  const SpectralField random =
      RandomSpectralField(config.d, n, config.seed + static_cast<uint64_t>(n));
  const int samples = 201;
  std::vector<CellValue> row{
      static_cast<long long>(n),
      single.Eigenvalue(single.modes()[0]),
      -LogL2NormAt(single, T),
      CheckLogConvexity(single, T, samples).max_violation,
      CheckLogConvexity(random, T, samples).max_violation,
      CheckSmoothing(single, T).constant,
      CheckSmoothing(random, T).constant,
  };
  for (double beta : config.betas) {
    row.push_back(CheckHbetaStability(single, T, beta, samples).max_ratio);
    row.push_back(L2HbetaNorm(single, T, beta));
  }
  return {row};
}

std::vector<std::string> Columns(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::kInfSup:
      return {"k", "dofs", "gamma_infsup"};
    case ExperimentKind::kStabilityOracle: {
      std::vector<std::string> cols{"k",
                                    "eigenvalue",
                                    "neg_log_norm_T",
                                    "logconv_violation_single",
                                    "logconv_violation_random",
                                    "smoothing_single",
                                    "smoothing_random"};
      for (double beta : config.betas) {
        char buffer[64];
        std::snprintf(buffer, sizeof(buffer), "hbeta_ratio@%g", beta);
        cols.push_back(buffer);
        std::snprintf(buffer, sizeof(buffer), "l2hbeta@%g", beta);
        cols.push_back(buffer);
      }
      return cols;
    }
    default: {
      std::vector<std::string> cols{
          "k",         "dofs",     "strategy", "epsilon",
          "pcg_iterations", "stopping_value", "threshold", "converged",
          "err_l2l2",  "err_l2h1"};
      for (double t : config.slice_times) cols.push_back(SliceColumn(t));
      return cols;
    }
  }
}

}  // namespace

ResultTable RunExperiment(const ExperimentConfig& config, int threads,
                          std::ostream* log) {
  ResultTable table;
  table.columns = Columns(config);
  const size_t levels = config.k_range.size();
  std::vector<std::vector<std::vector<CellValue>>> per_level(levels);
  std::vector<std::exception_ptr> errors(levels);
  std::mutex log_mutex;
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    for (size_t i = next++; i < levels; i = next++) {
      try {
        switch (config.experiment) {
          case ExperimentKind::kInfSup:
            per_level[i] = InfSupLevel(config, i);
            break;
          case ExperimentKind::kStabilityOracle:
            per_level[i] = OracleLevel(config, i);
            break;
          default:
            per_level[i] = SolveLevel(config, i, log, log_mutex);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(threads, static_cast<int>(levels)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();

  for (size_t i = 0; i < levels; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("k = " + std::to_string(config.k_range[i]) +
                               ": " + e.what());
    }
  }
  for (auto& rows : per_level) {
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string QuoteIfNeeded(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

CellValue ParseCell(const std::string& text) {
  if (!text.empty()) {
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(text.c_str(), &end, 10);
    if (*end == '\0' && errno == 0) return i;
    const double d = std::strtod(text.c_str(), &end);
    if (*end == '\0') return d;
  }
  return text;
}

}  // namespace

void WriteCsv(const ResultTable& table, std::ostream& out) {
  for (size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << QuoteIfNeeded(table.columns[c]);
  }
  out << '\n';
  char buffer[64];
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (const auto* i = std::get_if<long long>(&row[c])) {
        std::snprintf(buffer, sizeof(buffer), "%lld", *i);
        out << buffer;
      } else if (const auto* d = std::get_if<double>(&row[c])) {
        std::snprintf(buffer, sizeof(buffer), "%.16e", *d);
        out << buffer;
      } else {
        out << QuoteIfNeeded(std::get<std::string>(row[c]));
      }
    }
    out << '\n';
  }
}

ResultTable ReadCsv(std::istream& in) {
  ResultTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("ReadCsv: empty");
  table.columns = SplitCsvLine(line);
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != table.columns.size()) {
      throw std::invalid_argument("ReadCsv: line " + std::to_string(number) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields, expected " +
                                  std::to_string(table.columns.size()));
    }
    std::vector<CellValue> row;
    for (const auto& f : fields) row.push_back(ParseCell(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace backsolve
