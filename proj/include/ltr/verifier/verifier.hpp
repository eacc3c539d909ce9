#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltr/encoder/encoder.hpp"
#include "ltr/io/io.hpp"
#include "ltr/solver/solver.hpp"

namespace ltr::verifier {

using encoder::VerificationQuery;

enum class Verdict { Robust, NotRobust, Undecided };
enum class UndecidedReason { None, Timeout, NumericalMismatch, Error };

std::string to_string(Verdict v);        // "robust" | "not_robust" | "undecided"
std::string to_string(UndecidedReason r);  // "" | "timeout" | "numerical_mismatch" | "error"

struct Counterexample {
    std::vector<TransformKind> kinds;  // one per transformation of the query
    std::vector<Instantiation> instantiations;
    Tensor3 offsets;  // perturbation actually used (counterexample minus transformed image)
    Image image;      // exact tensor fed to the network
    int adversarial_label = 0;
    bool replay_confirmed = false;
    bool tie_only = false;  // argmax still returns the label, but another logit ties it
    std::vector<double> logits;
};

struct VerificationOutcome {
    Verdict verdict = Verdict::Undecided;
    UndecidedReason reason = UndecidedReason::None;
    int label = 0;
    std::optional<Counterexample> counterexample;
    double seconds = 0.0;
    milp::SolveStats stats;
    std::string detail;
    bool exhaustive = true;        // falsifiers: false when a grid stood in for a continuous domain
    std::size_t evaluations = 0;   // falsifiers: forward passes executed
};

/// Replay rule: another logit reaching the label's logit (within 1e-9) is a violation.
/// Returns the violating class (1-based) or 0.
int violating_class(std::span<const double> logits, int label);

/// Encodes, solves (builtin backend when `backend` is null) and replays any counterexample.
VerificationOutcome verify(const VerificationQuery& query, const milp::SolverConfig& config = {},
                           milp::SolverBackend* backend = nullptr);

/// Exhaustive search over the product of all domains, photometric boxes on a
/// grid x grid lattice. Instantiations that clamp a pixel are skipped.
/// Throws DomainError when the query has a perturbation radius.
VerificationOutcome falsify_bruteforce(const VerificationQuery& query, int grid = 21);

/// `samples` uniformly drawn instantiations (plus offsets when rho > 0).
VerificationOutcome falsify_random(const VerificationQuery& query, std::size_t samples, std::uint64_t seed);

struct BatchQuery {
    std::string name;
    std::string domain;
    VerificationQuery query;
    milp::SolverConfig config;
};

struct BatchItem {
    std::string name;
    std::string domain;
    VerificationOutcome outcome;
};

/// Runs the queries on up to `jobs` threads; results keep the input order.
std::vector<BatchItem> batch_verify(const std::vector<BatchQuery>& queries, std::size_t jobs = 1,
                                    milp::SolverBackend* backend = nullptr);

struct ReportRow {
    std::string domain;
    std::size_t verified = 0;  // decided within the timeout
    double mean_seconds = 0.0; // over decided queries
    std::size_t ltr = 0;       // robust
};

/// One row per domain in first-appearance order.
std::vector<ReportRow> summarize(const std::vector<BatchItem>& items);
/// Tab-separated, header "domain\tverified\tmean_s\tltr".
std::string format_report(const std::vector<ReportRow>& rows);

/// On-disk form of an outcome (no timings).
io::OutcomeDocument to_document(const std::string& name, const VerificationOutcome& outcome);
/// Inverse of to_document as far as the document reaches (no logits or offsets).
VerificationOutcome from_document(const io::OutcomeDocument& doc);

struct ExportItem {
    int original_label = 0;
    VerificationOutcome outcome;
};

/// Writes adv_NNNN.json (lossless) and, for single-channel images, adv_NNNN.pgm
/// for every NotRobust outcome, plus manifest.tsv. Returns the number of counterexamples written.
std::size_t export_adversarial_set(const std::vector<ExportItem>& items, const std::string& directory);

}  // namespace ltr::verifier
