#include "torusmech/spec_io.hpp"

#include <fstream>
#include <stdexcept>

namespace torusmech {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string("unknown key \"") + it.key() +
                                  "\" in " + where);
  }
}

Eigen::MatrixXd parse_metric(const json& jm, int n) {
  if (!jm.is_object())
    throw std::invalid_argument("\"metric\" must be an object");
  reject_unknown_keys(jm, {"diag", "full"}, "metric");
  if (jm.contains("diag") == jm.contains("full"))
    throw std::invalid_argument("metric needs exactly one of \"diag\", \"full\"");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  if (jm.contains("diag")) {
    const json& d = jm.at("diag");
    if (!d.is_array() || static_cast<int>(d.size()) != n)
      throw std::invalid_argument("metric diag length must equal dimension");
    for (int i = 0; i < n; ++i) g(i, i) = d.at(i).get<double>();
  } else {
    const json& rows = jm.at("full");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
      throw std::invalid_argument("metric full must be an n x n array");
    for (int i = 0; i < n; ++i) {
      const json& row = rows.at(i);
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw std::invalid_argument("metric full must be an n x n array");
      for (int j = 0; j < n; ++j) g(i, j) = row.at(j).get<double>();
    }
  }
  return g;
}

TrigKind parse_kind(const json& jk) {
  std::string s = jk.get<std::string>();
  if (s == "cos") return TrigKind::Cos;
  if (s == "sin") return TrigKind::Sin;
  throw std::invalid_argument("term kind must be \"cos\" or \"sin\"");
}

}  // namespace

SystemSpec parse_system(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("system spec must be an object");
  reject_unknown_keys(j, {"dimension", "metric", "potential"}, "system spec");
  if (!j.contains("dimension"))
    throw std::invalid_argument("system spec missing \"dimension\"");
  int n = j.at("dimension").get<int>();
  if (n < 1 || n > 6)
    throw std::invalid_argument("dimension must satisfy 1 <= n <= 6");

  Eigen::MatrixXd g = j.contains("metric")
                          ? parse_metric(j.at("metric"), n)
                          : Eigen::MatrixXd::Identity(n, n).eval();

  std::vector<TrigTerm> terms;
  if (j.contains("potential")) {
    const nlohmann::json& jp = j.at("potential");
    if (!jp.is_array())
      throw std::invalid_argument("\"potential\" must be an array of terms");
    for (const auto& jt : jp) {
      reject_unknown_keys(jt, {"amplitude", "wave", "kind"}, "potential term");
      TrigTerm t;
      t.amplitude = jt.at("amplitude").get<double>();
      const nlohmann::json& w = jt.at("wave");
      if (!w.is_array() || static_cast<int>(w.size()) != n)
        throw std::invalid_argument("term wave length must equal dimension");
      for (const auto& e : w) t.wave.push_back(e.get<int>());
      t.kind = parse_kind(jt.at("kind"));
      terms.push_back(std::move(t));
    }
  }
  return SystemSpec{TorusModel(n, std::move(g)), TrigPotential(n, std::move(terms))};
}

SystemSpec load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system spec: " + path);
  nlohmann::json j;
  in >> j;
  return parse_system(j);
}

nlohmann::json system_to_json(const SystemSpec& spec) {
  nlohmann::ordered_json j;
  int n = spec.model.dimension();
  j["dimension"] = n;
  if (spec.model.metric_is_diagonal()) {
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = spec.model.metric()(i, i);
    j["metric"] = {{"diag", d}};
  } else {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) rows[i][k] = spec.model.metric()(i, k);
    j["metric"] = {{"full", rows}};
  }
  nlohmann::ordered_json jp = nlohmann::ordered_json::array();
  for (const TrigTerm& t : spec.potential.terms()) {
    nlohmann::ordered_json jt;
    jt["amplitude"] = t.amplitude;
    jt["wave"] = t.wave;
    jt["kind"] = to_string(t.kind);
    jp.push_back(std::move(jt));
  }
  j["potential"] = std::move(jp);
  return j;
}

SystemSpec example3_system(int dimension, const std::vector<int>& waves) {
  if (static_cast<int>(waves.size()) != dimension)
    throw std::invalid_argument("one wave number per axis required");
  std::vector<TrigTerm> terms;
  for (int i = 0; i < dimension; ++i) {
    if (waves[i] < 1) throw std::invalid_argument("wave numbers must be >= 1");
    std::vector<int> w(dimension, 0);
    w[i] = waves[i];
    terms.push_back({1.0, std::move(w), TrigKind::Cos});
  }
  return SystemSpec{TorusModel::euclidean(dimension),
                    TrigPotential(dimension, std::move(terms))};
}

}  // namespace torusmech
