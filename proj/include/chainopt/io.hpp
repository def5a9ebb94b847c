#pragma once

#include <string>
#include <vector>

#include "chainopt/graph.hpp"
#include "chainopt/random_support.hpp"
#include "chainopt/spsa.hpp"

namespace chainopt {

// FNV-1a 64-bit hash of a byte string, rendered as 16 hex digits. Weight
// files carry the hash of the graph file they were produced from so stale
// pairings are caught on load.
std::string fnv1a_hex(const std::string& bytes);

struct GraphFile {
  Graph graph;
  FailureModel failures;  // empty when the file lists no risky edges
  std::string hash;       // hash of the raw file bytes
  std::string name;
};

// JSON graph format: {"nodes": n, "edges": [[i, j], ...]} with 1-based
// endpoints, optional "risky_edges": [[i, j, q], ...] and optional
// "correlation": {"rho": r, "couple_reciprocal": bool}. Throws ParseError
// on malformed input.
GraphFile parse_graph(const std::string& text);
GraphFile load_graph(const std::string& path);

// Weight vector files: '#'-prefixed header with the graph hash, then one
// "edge_index from to weight" row per edge (1-based nodes, %.17g weights).
std::string format_weights(const Graph& g, const std::string& graph_hash, const Vector& x);
void write_weights(const std::string& path, const Graph& g,
                   const std::string& graph_hash, const Vector& x);
Vector parse_weights(const std::string& text, const Graph& g, const std::string& graph_hash);
Vector read_weights(const std::string& path, const Graph& g, const std::string& graph_hash);

// Optimization trace as CSV. Wall-clock seconds are written to a separate
// timings file so traces are bit-identical across equal-seed runs.
std::string format_trace(const std::vector<Checkpoint>& rows);
std::string format_timings(const std::vector<Checkpoint>& rows);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Run configuration files: JSON with SpsaConfig fields plus "constraint"
// (simplex | stationary | symmetric), "support" (fixed | random | online),
// "objective" (unit | kemeny | target_pi | custom), "target_pi" ("uniform"
// or an explicit distribution) and "custom" (row-major matrix). Unknown
// keys are rejected.
struct RunSettings {
  SpsaConfig spsa;
  ConstraintMode constraint = ConstraintMode::Simplex;
  SupportMode support = SupportMode::Fixed;
  ConnectivityMode objective = ConnectivityMode::Unit;
  bool target_uniform = true;
  Vector target;  // explicit target distribution when not uniform
  Matrix custom;  // custom objective weights
};

RunSettings parse_run_settings(const std::string& text);
RunSettings load_run_settings(const std::string& path);

const char* to_string(ConstraintMode m);
const char* to_string(SupportMode m);
const char* to_string(ConnectivityMode m);
ConstraintMode parse_constraint_mode(const std::string& name);
SupportMode parse_support_mode(const std::string& name);
ConnectivityMode parse_connectivity_mode(const std::string& name);

// Manifest describing a run: command, input paths and hashes, the full
// effective configuration and the produced files. JSON, written next to the
// other outputs.
std::string format_manifest(const std::string& command, const std::string& graph_path,
                            const std::string& graph_hash, const RunSettings& settings,
                            const std::vector<std::string>& outputs);

}  // namespace chainopt
