#include "chainopt/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chainopt/errors.hpp"
#include "json.hpp"

namespace chainopt {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known)
      if (it.key() == k) found = true;
    if (!found) throw ParseError("unknown key \"" + it.key() + "\" in " + what);
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GraphFile parse_graph(const std::string& text) {
  json j = parse_json(text, "graph file");
  if (!j.is_object()) throw ParseError("graph file must be a JSON object");
  reject_unknown_keys(j, {"nodes", "edges", "risky_edges", "correlation", "name", "comment"},
                      "graph file");
  try {
    if (!j.contains("nodes") || !j.contains("edges"))
      throw ParseError("graph file needs \"nodes\" and \"edges\"");
    int nodes = j.at("nodes").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ParseError("each edge must be a [from, to] pair (1-based)");
      edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1});
    }

    std::vector<std::pair<Edge, double>> risky_raw;
    if (j.contains("risky_edges")) {
      for (const auto& r : j.at("risky_edges")) {
        if (!r.is_array() || r.size() != 3)
          throw ParseError("each risky edge must be a [from, to, probability] triple");
        risky_raw.push_back({{r[0].get<int>() - 1, r[1].get<int>() - 1}, r[2].get<double>()});
      }
    }

    GraphFile gf;
    // First build without risky ids to get the canonical edge ordering.
    Graph base = make_graph(nodes, edges);
    std::vector<std::pair<int, double>> risky_ids;
    for (const auto& [edge, q] : risky_raw) {
      auto id = base.find_edge(edge.from, edge.to);
      if (!id)
        throw ParseError("risky edge (" + std::to_string(edge.from + 1) + ", " +
                         std::to_string(edge.to + 1) + ") is not in the edge list");
      risky_ids.push_back({*id, q});
    }
    std::sort(risky_ids.begin(), risky_ids.end());
    std::vector<int> ids;
    for (const auto& [id, q] : risky_ids) {
      ids.push_back(id);
      gf.failures.fail_prob.push_back(q);
    }
    gf.graph = make_graph(nodes, edges, ids);

    if (j.contains("correlation")) {
      const json& c = j.at("correlation");
      reject_unknown_keys(c, {"rho", "couple_reciprocal"}, "correlation block");
      if (c.contains("rho")) {
        gf.failures.rho = c.at("rho").get<double>();
        gf.failures.correlated = gf.failures.rho > 0.0;
      }
      if (c.contains("couple_reciprocal"))
        gf.failures.couple_reciprocal = c.at("couple_reciprocal").get<bool>();
    }
    if (j.contains("name")) gf.name = j.at("name").get<std::string>();
    gf.hash = fnv1a_hex(text);
    return gf;
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
}

GraphFile load_graph(const std::string& path) {
  GraphFile gf = parse_graph(read_text(path));
  if (gf.name.empty()) gf.name = std::filesystem::path(path).stem().string();
  return gf;
}

std::string format_weights(const Graph& g, const std::string& graph_hash, const Vector& x) {
  if (x.size() != g.edge_count())
    throw std::invalid_argument("weight vector length does not match edge count");
  std::ostringstream out;
  out << "# chainopt weights\n# graph " << graph_hash << "\n";
  for (int e = 0; e < g.edge_count(); ++e)
    out << e + 1 << " " << g.edges[e].from + 1 << " " << g.edges[e].to + 1 << " "
        << g17(x[e]) << "\n";
  return out.str();
}

void write_weights(const std::string& path, const Graph& g, const std::string& graph_hash,
                   const Vector& x) {
  write_text(path, format_weights(g, graph_hash, x));
}

Vector parse_weights(const std::string& text, const Graph& g, const std::string& graph_hash) {
  std::istringstream in(text);
  std::string line;
  Vector x(g.edge_count());
  int row = 0;
  bool hash_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string prefix = "# graph ";
      if (line.rfind(prefix, 0) == 0) {
        std::string h = line.substr(prefix.size());
        hash_seen = true;
        if (!graph_hash.empty() && h != graph_hash)
          throw std::invalid_argument("weight file was written for a different graph (hash " +
                                      h + ", expected " + graph_hash + ")");
      }
      continue;
    }
    std::istringstream ls(line);
    int idx, from, to;
    double w;
    if (!(ls >> idx >> from >> to >> w))
      throw ParseError("malformed weight row: " + line);
    if (row >= g.edge_count()) throw ParseError("weight file has too many rows");
    if (idx != row + 1 || from != g.edges[row].from + 1 || to != g.edges[row].to + 1)
      throw ParseError("weight row " + std::to_string(row + 1) +
                       " does not match the graph's edge ordering");
    x[row++] = w;
  }
  if (!hash_seen && !graph_hash.empty())
    throw std::invalid_argument("weight file carries no graph hash");
  if (row != g.edge_count()) throw ParseError("weight file has too few rows");
  return x;
}

Vector read_weights(const std::string& path, const Graph& g, const std::string& graph_hash) {
  return parse_weights(read_text(path), g, graph_hash);
}

std::string format_trace(const std::vector<Checkpoint>& rows) {
  std::ostringstream out;
  out << "iteration,objective,gradient_norm,feasibility_residual\n";
  for (const Checkpoint& c : rows)
    out << c.iteration << "," << g17(c.objective) << "," << g17(c.gradient_norm) << ","
        << g17(c.feasibility) << "\n";
  return out.str();
}

std::string format_timings(const std::vector<Checkpoint>& rows) {
  std::ostringstream out;
  out << "iteration,seconds\n";
  char buf[64];
  for (const Checkpoint& c : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%.6f\n", c.iteration, c.seconds);
    out << buf;
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("write to " + path + " failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunSettings parse_run_settings(const std::string& text) {
  json j = parse_json(text, "run configuration");
  if (!j.is_object()) throw ParseError("run configuration must be a JSON object");
  reject_unknown_keys(j,
                      {"alpha", "alpha0", "gamma_alpha", "eta", "gamma_eta", "epsilon",
                       "epsilon_decay", "iterations", "checkpoint_every", "tolerance",
                       "max_step_norm", "restarts", "seed", "threads", "batch_size",
                       "eval_batch", "sample_stride", "log_realizations", "constraint",
                       "support", "objective", "target_pi", "custom", "name", "comment"},
                      "run configuration");
  RunSettings s;
  try {
    SpsaConfig& c = s.spsa;
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("alpha0")) c.alpha0 = j.at("alpha0").get<double>();
    if (j.contains("gamma_alpha")) c.gamma_alpha = j.at("gamma_alpha").get<double>();
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("gamma_eta")) c.gamma_eta = j.at("gamma_eta").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("epsilon_decay")) c.epsilon_decay = j.at("epsilon_decay").get<double>();
    if (j.contains("iterations")) c.iterations = j.at("iterations").get<long>();
    if (j.contains("checkpoint_every")) c.checkpoint_every = j.at("checkpoint_every").get<long>();
    if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
    if (j.contains("max_step_norm")) c.max_step_norm = j.at("max_step_norm").get<double>();
    if (j.contains("restarts")) c.restarts = j.at("restarts").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("eval_batch")) c.eval_batch = j.at("eval_batch").get<int>();
    if (j.contains("sample_stride")) c.sample_stride = j.at("sample_stride").get<long>();
    if (j.contains("log_realizations")) c.log_realizations = j.at("log_realizations").get<bool>();

    if (j.contains("constraint"))
      s.constraint = parse_constraint_mode(j.at("constraint").get<std::string>());
    if (j.contains("support")) s.support = parse_support_mode(j.at("support").get<std::string>());
    if (j.contains("objective"))
      s.objective = parse_connectivity_mode(j.at("objective").get<std::string>());
    if (j.contains("target_pi")) {
      const json& t = j.at("target_pi");
      if (t.is_string() && t.get<std::string>() == "uniform") {
        s.target_uniform = true;
      } else if (t.is_array()) {
        s.target_uniform = false;
        s.target.resize(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) s.target[i] = t[i].get<double>();
      } else {
        throw ParseError("target_pi must be \"uniform\" or an array of probabilities");
      }
    }
    if (j.contains("custom")) {
      const json& m = j.at("custom");
      if (!m.is_array() || m.empty()) throw ParseError("custom objective must be a matrix");
      s.custom.resize(m.size(), m[0].size());
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i].is_array() || m[i].size() != m[0].size())
          throw ParseError("custom objective must be a rectangular matrix");
        for (std::size_t k = 0; k < m[i].size(); ++k) s.custom(i, k) = m[i][k].get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("run configuration: ") + e.what());
  }
  return s;
}

RunSettings load_run_settings(const std::string& path) {
  return parse_run_settings(read_text(path));
}

std::string format_manifest(const std::string& command, const std::string& graph_path,
                            const std::string& graph_hash, const RunSettings& settings,
                            const std::vector<std::string>& outputs) {
  const SpsaConfig& c = settings.spsa;
  json j;
  j["command"] = command;
  j["graph"] = graph_path;
  j["graph_hash"] = graph_hash;
  json cfg;
  cfg["alpha"] = c.alpha;
  cfg["alpha0"] = c.alpha0;
  cfg["gamma_alpha"] = c.gamma_alpha;
  cfg["eta"] = c.eta;
  cfg["gamma_eta"] = c.gamma_eta;
  cfg["epsilon"] = c.epsilon;
  cfg["epsilon_decay"] = c.epsilon_decay;
  cfg["iterations"] = c.iterations;
  cfg["checkpoint_every"] = c.checkpoint_every;
  cfg["tolerance"] = c.tolerance;
  cfg["max_step_norm"] = c.max_step_norm;
  cfg["restarts"] = c.restarts;
  cfg["seed"] = c.seed;
  cfg["threads"] = c.threads;
  cfg["batch_size"] = c.batch_size;
  cfg["eval_batch"] = c.eval_batch;
  cfg["sample_stride"] = c.sample_stride;
  cfg["log_realizations"] = c.log_realizations;
  cfg["constraint"] = to_string(settings.constraint);
  cfg["support"] = to_string(settings.support);
  cfg["objective"] = to_string(settings.objective);
  if (settings.target_uniform) {
    cfg["target_pi"] = "uniform";
  } else {
    std::vector<double> t(settings.target.begin(), settings.target.end());
    cfg["target_pi"] = t;
  }
  j["config"] = cfg;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

const char* to_string(ConstraintMode m) {
  switch (m) {
    case ConstraintMode::Simplex: return "simplex";
    case ConstraintMode::Stationary: return "stationary";
    case ConstraintMode::Symmetric: return "symmetric";
  }
  return "unknown";
}

const char* to_string(SupportMode m) {
  switch (m) {
    case SupportMode::Fixed: return "fixed";
    case SupportMode::Random: return "random";
    case SupportMode::Online: return "online";
  }
  return "unknown";
}

const char* to_string(ConnectivityMode m) {
  switch (m) {
    case ConnectivityMode::Unit: return "unit";
    case ConnectivityMode::Kemeny: return "kemeny";
    case ConnectivityMode::TargetPi: return "target_pi";
    case ConnectivityMode::Custom: return "custom";
  }
  return "unknown";
}

ConstraintMode parse_constraint_mode(const std::string& name) {
  if (name == "simplex") return ConstraintMode::Simplex;
  if (name == "stationary") return ConstraintMode::Stationary;
  if (name == "symmetric") return ConstraintMode::Symmetric;
  throw ParseError("unknown constraint mode \"" + name + "\"");
}

SupportMode parse_support_mode(const std::string& name) {
  if (name == "fixed") return SupportMode::Fixed;
  if (name == "random") return SupportMode::Random;
  if (name == "online") return SupportMode::Online;
  throw ParseError("unknown support mode \"" + name + "\"");
}

ConnectivityMode parse_connectivity_mode(const std::string& name) {
  if (name == "unit") return ConnectivityMode::Unit;
  if (name == "kemeny") return ConnectivityMode::Kemeny;
  if (name == "target_pi") return ConnectivityMode::TargetPi;
  if (name == "custom") return ConnectivityMode::Custom;
  throw ParseError("unknown objective mode \"" + name + "\"");
}

}  // namespace chainopt
