#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "morphrom/config.hpp"
#include "morphrom/ddpod.hpp"
#include "morphrom/podi.hpp"
#include "morphrom/sampling.hpp"

namespace morphrom {

// In-memory view of an offline store. Loaded only from complete stores;
// every block is checksum-verified on the way in.
struct Store {
    std::filesystem::path dir;
    nlohmann::json manifest;
    StructuredMesh mesh;  // unmorphed baseline geometry
    SnapshotDatabase db;
    PODBasis full_basis;
    PODIModel podi;
    std::vector<double> baseline_field;
    double baseline_qoi = 0.0;   // normalized flux functional at mu = 0
    double baseline_norm = 0.0;  // l2 norm of the baseline field
};

struct OfflineOutcome {
    bool up_to_date = false;  // complete store found, nothing recomputed
    int solves = 0;           // full-order solves actually run this call
    int snapshot_count = 0;
    bool converged = false;  // greedy stopped on its tolerance
    std::filesystem::path manifest_path;
};

// Runs greedy sampling on the configured problem and writes the store:
// mesh, snapshot fields, baseline, full and patch-restricted bases, the
// interpolation model and the sampling history. Safe to interrupt (each
// solved snapshot is checkpointed) and to re-run: a partial store resumes,
// a complete one is only verified.
OfflineOutcome cmd_offline(const RunConfig& cfg, const std::filesystem::path& store_dir);

Store load_store(const RunConfig& cfg, const std::filesystem::path& store_dir);

struct EvalOutcome {
    std::string method;
    ParameterPoint mu;
    std::vector<double> field;  // full-mesh cell values
    double qoi = 0.0;
    double seconds = 0.0;  // evaluation only; mesh morphing and store IO excluded
    nlohmann::json detail;
};

// Evaluates one parameter point with method "podi", "ddpod" or "fom" against
// the store's basis and the configured problem.
EvalOutcome evaluate(const RunConfig& cfg, const Store& store, const ParameterPoint& mu,
                     const std::string& method);

// evaluate() plus result files under <store>/eval: the field block, a JSON
// record with the QoI, timing and config hash, and for ddpod a convergence
// history CSV.
EvalOutcome cmd_eval(const RunConfig& cfg, const Store& store, const ParameterPoint& mu,
                     const std::string& method);

// For every configured validation point and every database prefix size,
// evaluates podi and ddpod against a fresh full-order solution and writes
// report.csv (errors, deterministic) and timings.csv (wall times and
// speed-ups, machine-dependent). Errors are normalized by the baseline:
// |u - u_fom| / |u_base| and |Q - Q_fom| / |Q_base|.
void cmd_report(const RunConfig& cfg, const Store& store);

}  // namespace morphrom
