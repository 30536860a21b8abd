// Batch driver: instance documents, verification pipelines, certificate
// reports and twist serialization. All file formats are JSON with exact
// rationals as "p/q" strings; reports and twist files are deterministic
// given the document (timings excluded).

#pragma once

#include <optional>
#include <string>

#include "dyt/reduction.hpp"

namespace dyt {

struct InstanceDocument {
  std::string name;
  LieAlgebraData L;
  bool r_from_splitting = true;
  // explicit r-matrix terms (ascending index pairs) when not from-splitting
  std::vector<std::tuple<int, int, SPoly, SPoly>> r_terms;  // i, j, num, den
  std::vector<std::tuple<int, int, int, Rational>> z_terms;
  int Nh = 2;
  int Dx = 8;
  std::vector<Rational> base_point;
  std::string pipeline;  // classical | quantize | compose
  std::string raw;       // canonical serialized form (hash input)

  static InstanceDocument load(const std::string& path);
  static InstanceDocument parse(const std::string& json_text);
};

struct CheckRecord {
  std::string name;
  bool pass = false;
  std::string detail;   // witness on failure, orders used, etc.
  long ms = 0;
};

struct CertificateReport {
  std::string artifact_version;
  std::string instance_name;
  std::string instance_hash;
  std::string pipeline;
  int Nh = 0, Dx = 0;
  std::vector<CheckRecord> checks;
  bool all_pass() const {
    for (auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string to_json(bool with_timings = true) const;
  std::string to_text() const;
};

// Runs the selected pipeline; mathematical failures are embedded in the
// report (the caller maps them to exit code 1). Input and internal errors
// throw (exit code 2). For the quantize pipeline, `out_twist_json` (when
// non-null) receives the serialized twist on success.
CertificateReport run_pipeline(const InstanceDocument& doc,
                               std::string* out_twist_json = nullptr);

// Serialized twist of the quantize pipeline (deterministic JSON).
std::string twist_to_json(const InstanceDocument& doc, const EnvTensor& J);
// Re-loads a twist file (the caller owns the context and PBW engine).
EnvTensor twist_from_json(const std::string& text, const JetContext* ctx,
                          const PbwAlgebra* alg);

uint64_t fnv1a(const std::string& s);
std::string artifact_version();

}  // namespace dyt
