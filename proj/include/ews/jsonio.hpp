// Deterministic JSON/CSV writers (17 significant digits, fixed key order)
// and strict parsers for the tool's file formats.
#pragma once

#include <string>

#include "ews/duffing.hpp"
#include "ews/experiments.hpp"
#include "ews/flow.hpp"
#include "ews/lncde.hpp"
#include "ews/path.hpp"
#include "ews/tensor.hpp"

namespace ews::jsonio {

// --- writers -------------------------------------------------------------

// {"rows":R,"cols":C,"data":[...]} with row-major data.
std::string matrix_json(const Matrix& m);

// {"A":{...},"B":"identity"|{...},"structure":"..."}
std::string operator_json(const Operator& op);

// {"dim":d,"depth":n,"levels":[[1],[...],...]} — levels 0..n, row-major.
std::string tensor_json(const TruncatedTensor& t);

// {"dim":d,"depth":n,"stream":[{"clock":t,"levels":[...]},...]} — one entry
// per knot of the scanned path (the first is the unit tensor).
std::string tensor_stream_json(const std::vector<double>& clocks,
                               const std::vector<TruncatedTensor>& tensors);

// {"min":[...],"max":[...]}
std::string normalization_json(const NormalizationStats& stats);

// Full flattened system: derivation blocks per level (computed from `a`),
// the assembled derivation, and the raising and step matrices per channel.
std::string lncde_json(const Matrix& a, const LncdeSystem& sys);

// Resolved experiment configurations (all defaults filled in).
std::string expressivity_config_json(const ExpressivityConfig& cfg);
std::string sde_config_json(const SdeConfig& cfg);

// Experiment report: resolved config plus per-group, per-learner, per-seed
// metrics, learned operators, and spectra. config_json must already be
// serialized (see the config writers above).
std::string experiment_report_json(const ExperimentResult& res, const std::string& config_json);

// Flat per-time prediction rows for one experiment group:
// seed,t,truth,pred_ews,pred_efm,pred_sig (missing learners left empty).
std::string predictions_csv(const ExperimentGroup& group);

// t,S0..SK,approx,truth,bound rows for a chain reconstruction.
std::string duffing_chain_csv(const DuffingReconstruction& rec);

// --- parsers -------------------------------------------------------------

// Strict parsers: unknown keys are rejected, shapes validated. `what` names
// the source (file name) for error messages.
Operator parse_operator_json(const std::string& text, const std::string& what);
TruncatedTensor parse_tensor_json(const std::string& text, const std::string& what);
ExpressivityConfig parse_expressivity_config(const std::string& text, const std::string& what);
SdeConfig parse_sde_config(const std::string& text, const std::string& what);

// Names used on the command line and in reports: learners and targets are
// "ews" (full operator), "efm" (diagonal), "signature"/"sig" (zero).
LearnerKind parse_learner_kind(const std::string& s);
TargetKind parse_target_kind(const std::string& s);
const char* learner_label(LearnerKind k);

}  // namespace ews::jsonio
