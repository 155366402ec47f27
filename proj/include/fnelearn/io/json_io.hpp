#pragma once

// JSON formats for partitions, operators, training sets and the ADMM config.
// Doubles are written in nlohmann's shortest round-trip form, so reading a
// file back reproduces every coordinate bit for bit.

#include <Eigen/Core>

#include <json.hpp>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/learn/admm.hpp"
#include "fnelearn/learn/training_set.hpp"
#include "fnelearn/paop.hpp"

namespace fnelearn::io {

using json = nlohmann::ordered_json;

namespace detail {

inline json columns(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    json c = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) c.push_back(m(i, j));
    out.push_back(std::move(c));
  }
  return out;
}

// List of equal-length numeric arrays -> d x count matrix.
inline Eigen::MatrixXd matrix_of(const json& a, const char* what, int d = -1) {
  if (!a.is_array()) throw IoError(std::string(what) + ": expected an array");
  const auto m = static_cast<Eigen::Index>(a.size());
  if (m == 0) throw IoError(std::string(what) + ": empty array");
  if (!a[0].is_array()) throw IoError(std::string(what) + ": expected an array of arrays");
  if (d < 0) d = static_cast<int>(a[0].size());
  Eigen::MatrixXd out(d, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const json& c = a[static_cast<std::size_t>(j)];
    if (!c.is_array() || static_cast<int>(c.size()) != d) {
      throw IoError(std::string(what) + ": entry " + std::to_string(j) + " does not have " + std::to_string(d) +
                    " components");
    }
    for (int i = 0; i < d; ++i) {
      if (!c[static_cast<std::size_t>(i)].is_number()) throw IoError(std::string(what) + ": non-numeric entry");
      out(i, j) = c[static_cast<std::size_t>(i)].get<double>();
    }
  }
  return out;
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace detail

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

// ---- partition ----

inline json partition_to_json(const SimplicialPartition& p) {
  json j;
  j["dim"] = p.dim();
  j["points"] = detail::columns(p.nodes().points());
  json s = json::array();
  for (const auto& t : p.simplices()) s.push_back(t);
  j["simplices"] = std::move(s);
  return j;
}

inline SimplicialPartition partition_from_json(const json& j) {
  try {
    const int d = detail::field(j, "dim").get<int>();
    if (d < 1) throw IoError("partition: dim must be positive");
    Eigen::MatrixXd pts = detail::matrix_of(detail::field(j, "points"), "points", d);
    std::vector<Simplex> simplices;
    for (const auto& s : detail::field(j, "simplices")) {
      if (!s.is_array() || static_cast<int>(s.size()) != d + 1) {
        throw IoError("partition: every simplex needs " + std::to_string(d + 1) + " indices");
      }
      simplices.push_back(s.get<Simplex>());
    }
    return SimplicialPartition(NodeSet(std::move(pts)), std::move(simplices));
  } catch (const json::exception& e) {
    throw IoError(std::string("partition: ") + e.what());
  }
}

inline SimplicialPartition read_partition(const std::string& path) { return partition_from_json(read_json_file(path)); }
inline void write_partition(const std::string& path, const SimplicialPartition& p) {
  write_json_file(path, partition_to_json(p));
}

// ---- operator ----

inline json operator_to_json(const PiecewiseAffineOperator& op) {
  json j = partition_to_json(op.partition());
  j["values"] = detail::columns(op.values());
  j["meta"] = {{"epsilon_margin", op.meta().epsilon_margin},
               {"training_noise", op.meta().training_noise},
               {"seed", op.meta().seed}};
  return j;
}

// Rebuilds the partition caches and the per-simplex Jacobians from scratch;
// degenerate simplices are rejected here rather than at evaluation time.
inline std::shared_ptr<PiecewiseAffineOperator> operator_from_json(const json& j) {
  auto p = std::make_shared<const SimplicialPartition>(partition_from_json(j));
  for (std::size_t t = 0; t < p->size(); ++t) {
    if (!p->is_nondegenerate(t)) throw IoError("operator: simplex " + std::to_string(t) + " is degenerate");
  }
  try {
    Eigen::MatrixXd values = detail::matrix_of(detail::field(j, "values"), "values", p->dim());
    if (values.cols() != p->nodes().size()) throw IoError("operator: need one value per node");
    if (!values.allFinite()) throw IoError("operator: non-finite value");
    OperatorMeta meta;
    if (j.contains("meta")) {
      const json& m = j.at("meta");
      meta.epsilon_margin = m.value("epsilon_margin", 0.0);
      meta.training_noise = m.value("training_noise", 0.0);
      meta.seed = m.value("seed", std::uint64_t{0});
    }
    return std::make_shared<PiecewiseAffineOperator>(p, std::move(values), meta);
  } catch (const json::exception& e) {
    throw IoError(std::string("operator: ") + e.what());
  }
}

inline std::shared_ptr<PiecewiseAffineOperator> read_operator(const std::string& path) {
  return operator_from_json(read_json_file(path));
}
inline void write_operator(const std::string& path, const PiecewiseAffineOperator& op) {
  write_json_file(path, operator_to_json(op));
}

// ---- training set ----

inline json trainset_to_json(const TrainingSet& ts) {
  json pairs = json::array();
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    json x = json::array(), z = json::array();
    for (int k = 0; k < ts.dim(); ++k) {
      x.push_back(ts.inputs()(k, i));
      z.push_back(ts.targets()(k, i));
    }
    pairs.push_back({{"x", std::move(x)}, {"z", std::move(z)}});
  }
  return {{"pairs", std::move(pairs)}};
}

inline TrainingSet trainset_from_json(const json& j) {
  try {
    const json& pairs = detail::field(j, "pairs");
    if (!pairs.is_array() || pairs.empty()) throw IoError("trainset: 'pairs' must be a non-empty array");
    json xs = json::array(), zs = json::array();
    for (const auto& p : pairs) {
      xs.push_back(detail::field(p, "x"));
      zs.push_back(detail::field(p, "z"));
    }
    Eigen::MatrixXd x = detail::matrix_of(xs, "trainset x");
    Eigen::MatrixXd z = detail::matrix_of(zs, "trainset z", static_cast<int>(x.rows()));
    return TrainingSet(std::move(x), std::move(z));
  } catch (const json::exception& e) {
    throw IoError(std::string("trainset: ") + e.what());
  }
}

inline TrainingSet read_trainset(const std::string& path) { return trainset_from_json(read_json_file(path)); }
inline void write_trainset(const std::string& path, const TrainingSet& ts) {
  write_json_file(path, trainset_to_json(ts));
}

// ---- ADMM config ----

inline json admm_config_to_json(const AdmmConfig& c) {
  return {{"rho0", c.rho0},
          {"rho_growth", c.rho_growth},
          {"rho_max", c.rho_max},
          {"k_stationary", c.k_stationary},
          {"max_iters", c.max_iters},
          {"tol_primal", c.tol_primal},
          {"tol_dual", c.tol_dual},
          {"epsilon_margin", c.epsilon_margin},
          {"relaxation", c.relaxation},
          {"penalty_exponent", c.penalty_exponent},
          {"allow_constraint_only_nodes", c.allow_constraint_only_nodes}};
}

// Fields present in j override `base`; unknown keys are an error so typos
// do not pass silently.
inline AdmmConfig admm_config_from_json(const json& j, AdmmConfig base = {}) {
  if (!j.is_object()) throw InvalidConfig("config: expected a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "rho0") base.rho0 = v.get<double>();
      else if (k == "rho_growth") base.rho_growth = v.get<double>();
      else if (k == "rho_max") base.rho_max = v.get<double>();
      else if (k == "k_stationary") base.k_stationary = v.get<int>();
      else if (k == "max_iters") base.max_iters = v.get<int>();
      else if (k == "tol_primal") base.tol_primal = v.get<double>();
      else if (k == "tol_dual") base.tol_dual = v.get<double>();
      else if (k == "epsilon_margin") base.epsilon_margin = v.get<double>();
      else if (k == "relaxation") base.relaxation = v.get<double>();
      else if (k == "penalty_exponent") base.penalty_exponent = v.get<double>();
      else if (k == "allow_constraint_only_nodes") base.allow_constraint_only_nodes = v.get<bool>();
      else throw InvalidConfig("config: unknown field '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
  base.validate();
  return base;
}

}  // namespace fnelearn::io
