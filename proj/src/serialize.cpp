#include "honest_ate/serialize.hpp"

#include <cstdint>
#include <cstring>

#include "honest_ate/errors.hpp"

namespace honest_ate {

namespace {

constexpr int kPathSchemaVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

// FNV-1a over the raw little-endian bytes of the doubles/ints fed in.
struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= b[k];
      h *= 1099511628211ull;
    }
  }
  void add(double v) { bytes(&v, sizeof(v)); }
  void add(std::int64_t v) { bytes(&v, sizeof(v)); }
};

std::string pnorm_label(PNorm p) { return to_string(p); }

PNorm pnorm_from_label(const std::string& s) {
  if (s == "1") return PNorm::one;
  if (s == "2") return PNorm::two;
  if (s == "inf") return PNorm::inf;
  throw DataError("unknown norm exponent: " + s);
}

}  // namespace

json to_json(const Sample& sample) {
  json j;
  j["covariates"] = matrix_to_json(sample.covariates);
  json d = json::array();
  for (Eigen::Index i = 0; i < sample.treatments.size(); ++i) {
    d.push_back(sample.treatments(i));
  }
  j["treatments"] = std::move(d);
  if (sample.outcomes) j["outcomes"] = vector_to_json(*sample.outcomes);
  return j;
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.covariates = matrix_from_json(j.at("covariates"));
  const auto& d = j.at("treatments");
  s.treatments.resize(static_cast<Eigen::Index>(d.size()));
  for (Eigen::Index i = 0; i < s.treatments.size(); ++i) {
    s.treatments(i) = d.at(i).get<int>();
  }
  if (j.contains("outcomes")) s.outcomes = vector_from_json(j.at("outcomes"));
  return s;
}

json to_json(const NormSpec& norm) {
  json j;
  j["weight_matrix_half"] = matrix_to_json(norm.weight_matrix_half);
  j["p"] = pnorm_label(norm.exponent);
  return j;
}

NormSpec norm_from_json(const json& j) {
  NormSpec n;
  n.weight_matrix_half = matrix_from_json(j.at("weight_matrix_half"));
  n.exponent = pnorm_from_label(j.at("p").get<std::string>());
  return n;
}

json to_json(const LipschitzSpec& spec) {
  json j;
  j["C"] = spec.constant;
  j["norm"] = to_json(spec.norm);
  j["monotone_indices"] = spec.monotone_indices;
  return j;
}

LipschitzSpec lipschitz_from_json(const json& j) {
  LipschitzSpec s;
  s.constant = j.at("C").get<double>();
  s.norm = norm_from_json(j.at("norm"));
  s.monotone_indices = j.at("monotone_indices").get<std::vector<int>>();
  return s;
}

json to_json(const TargetWeights& target) {
  json j;
  j["kind"] = to_string(target.kind);
  j["weights"] = vector_to_json(target.weights);
  return j;
}

TargetWeights target_from_json(const json& j) {
  TargetWeights t;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "cate") t.kind = TargetKind::cate;
  else if (kind == "catt") t.kind = TargetKind::catt;
  else if (kind == "custom") t.kind = TargetKind::custom;
  else throw DataError("unknown target kind: " + kind);
  t.weights = vector_from_json(j.at("weights"));
  return t;
}

json to_json(const VarianceSpec& spec) {
  json j;
  switch (spec.mode) {
    case VarianceMode::homoskedastic:
      j["mode"] = "homoskedastic";
      j["sigma2"] = spec.sigma2;
      break;
    case VarianceMode::per_arm:
      j["mode"] = "per_arm";
      j["sigma2_0"] = spec.sigma2_0;
      j["sigma2_1"] = spec.sigma2_1;
      break;
    case VarianceMode::per_observation:
      j["mode"] = "per_observation";
      j["sigma2_obs"] = vector_to_json(spec.sigma2_obs);
      break;
  }
  return j;
}

VarianceSpec variance_from_json(const json& j) {
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "homoskedastic") {
    return VarianceSpec::homoskedastic(j.at("sigma2").get<double>());
  }
  if (mode == "per_arm") {
    return VarianceSpec::per_arm(j.at("sigma2_0").get<double>(),
                                 j.at("sigma2_1").get<double>());
  }
  if (mode == "per_observation") {
    return VarianceSpec::per_observation(vector_from_json(j.at("sigma2_obs")));
  }
  throw DataError("unknown variance mode: " + mode);
}

json path_to_json(const SolutionPath& path) {
  json j;
  j["schema_version"] = kPathSchemaVersion;
  j["w0"] = path.w0();
  j["w1"] = path.w1();
  j["sigma2_0"] = path.sigma2_0();
  j["sigma2_1"] = path.sigma2_1();
  j["reached_terminal"] = path.reached_terminal();
  j["target"] = to_json(path.target());

  const DistanceMatrices& dist = path.distances();
  j["d0"] = matrix_to_json(dist.d0);
  json tr = json::array(), cr = json::array();
  for (Eigen::Index v : dist.treated_rows) tr.push_back(v);
  for (Eigen::Index v : dist.control_rows) cr.push_back(v);
  j["treated_rows"] = std::move(tr);
  j["control_rows"] = std::move(cr);

  json knots = json::array();
  for (const KnotSummary& k : path.knots()) {
    knots.push_back({{"mu", k.mu},
                     {"qa", k.qa},
                     {"qb", k.qb},
                     {"qc", k.qc},
                     {"lw", k.lw},
                     {"lwd", k.lwd},
                     {"nm", k.nm},
                     {"dnm", k.dnm}});
  }
  j["knots"] = std::move(knots);

  json events = json::array();
  for (const auto& evs : path.events()) {
    json lst = json::array();
    for (const PathEvent& ev : evs) {
      lst.push_back({{"k", static_cast<int>(ev.kind)}, {"i", ev.i}, {"j", ev.j}});
    }
    events.push_back(std::move(lst));
  }
  j["events"] = std::move(events);
  return j;
}

SolutionPath path_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kPathSchemaVersion) {
    throw DataError("unsupported path archive version");
  }
  DistanceMatrices dist;
  dist.d0 = matrix_from_json(j.at("d0"));
  dist.d1 = dist.d0;
  for (const auto& v : j.at("treated_rows")) {
    dist.treated_rows.push_back(v.get<Eigen::Index>());
  }
  for (const auto& v : j.at("control_rows")) {
    dist.control_rows.push_back(v.get<Eigen::Index>());
  }
  std::vector<KnotSummary> knots;
  for (const auto& k : j.at("knots")) {
    KnotSummary s;
    s.mu = k.at("mu").get<double>();
    s.qa = k.at("qa").get<double>();
    s.qb = k.at("qb").get<double>();
    s.qc = k.at("qc").get<double>();
    s.lw = k.at("lw").get<double>();
    s.lwd = k.at("lwd").get<double>();
    s.nm = k.at("nm").get<double>();
    s.dnm = k.at("dnm").get<double>();
    knots.push_back(s);
  }
  std::vector<std::vector<PathEvent>> events;
  for (const auto& lst : j.at("events")) {
    std::vector<PathEvent> evs;
    for (const auto& e : lst) {
      evs.push_back({static_cast<PathEventKind>(e.at("k").get<int>()),
                     e.at("i").get<int>(), e.at("j").get<int>()});
    }
    events.push_back(std::move(evs));
  }
  return SolutionPath::from_archive(
      std::move(dist), target_from_json(j.at("target")), j.at("w0").get<double>(),
      j.at("w1").get<double>(), j.at("sigma2_0").get<double>(),
      j.at("sigma2_1").get<double>(), std::move(knots), std::move(events),
      j.at("reached_terminal").get<bool>());
}

std::string path_cache_key(const Sample& sample, const NormSpec& norm,
                           const TargetWeights& target, double sigma2_control,
                           double sigma2_treated) {
  Fnv f;
  f.add(static_cast<std::int64_t>(sample.n()));
  f.add(static_cast<std::int64_t>(sample.dim()));
  for (Eigen::Index r = 0; r < sample.covariates.rows(); ++r) {
    for (Eigen::Index c = 0; c < sample.covariates.cols(); ++c) {
      f.add(sample.covariates(r, c));
    }
  }
  for (Eigen::Index i = 0; i < sample.treatments.size(); ++i) {
    f.add(static_cast<std::int64_t>(sample.treatments(i)));
  }
  for (Eigen::Index r = 0; r < norm.weight_matrix_half.rows(); ++r) {
    for (Eigen::Index c = 0; c < norm.weight_matrix_half.cols(); ++c) {
      f.add(norm.weight_matrix_half(r, c));
    }
  }
  f.add(static_cast<std::int64_t>(norm.exponent));
  f.add(static_cast<std::int64_t>(target.kind));
  for (Eigen::Index i = 0; i < target.weights.size(); ++i) {
    f.add(target.weights(i));
  }
  f.add(sigma2_control);
  f.add(sigma2_treated);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(f.h));
  return std::string(buf);
}

}  // namespace honest_ate
