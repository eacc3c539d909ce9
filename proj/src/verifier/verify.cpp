#include <algorithm>
#include <chrono>

#include "ltr/core/errors.hpp"
#include "ltr/verifier/verifier.hpp"

namespace ltr::verifier {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<Instantiation> extract_instantiations(const VerificationQuery& q, const encoder::VariableMap& map,
                                                  const milp::Assignment& a) {
    std::vector<Instantiation> insts;
    for (std::size_t t = 0; t < q.transformations.size(); ++t) {
        const TransformationSpec& spec = q.transformations[t];
        const encoder::TransformVars& tv = map.transforms[t];
        Instantiation inst;
        if (spec.kind == TransformKind::Photometric) {
            inst.values = {std::clamp(a[tv.lambda[0]], spec.contrast.lo, spec.contrast.hi),
                           std::clamp(a[tv.lambda[1]], spec.luminosity.lo, spec.luminosity.hi)};
        } else {
            // The selector decides the active disjunct; lambda only mirrors it.
            std::size_t best = 0;
            for (std::size_t d = 1; d < tv.delta.size(); ++d) {
                if (a[tv.delta[d]] > a[tv.delta[best]]) {
                    best = d;
                }
            }
            inst.values = tv.points[best];
        }
        insts.push_back(std::move(inst));
    }
    return insts;
}

struct Replay {
    bool confirmed = false;
    bool tie_only = false;
    int adversarial = 0;
    std::vector<double> logits;
};

Replay replay(const Network& net, const Image& im, int label) {
    const ForwardResult f = forward(net, im);
    Replay r;
    r.logits = f.logits;
    r.confirmed = violating_class(f.logits, label) != 0;
    r.tie_only = r.confirmed && f.label == label;
    if (f.label != label) {
        r.adversarial = f.label;
    } else {
        // Strongest rival, so an unconfirmed point still names its target class.
        std::size_t best = label == 1 ? 1 : 0;
        for (std::size_t j = 0; j < f.logits.size(); ++j) {
            if (j + 1 != static_cast<std::size_t>(label) && f.logits[j] > f.logits[best]) {
                best = j;
            }
        }
        r.adversarial = static_cast<int>(best) + 1;
    }
    return r;
}

Counterexample interpret(const VerificationQuery& query, const encoder::VariableMap& map,
                         const milp::Assignment& a, std::string& detail) {
    Counterexample cex;
    for (const auto& spec : query.transformations) {
        cex.kinds.push_back(spec.kind);
    }
    cex.instantiations = extract_instantiations(query, map, a);
    const Image& im = query.image;
    Tensor3 pixels(im.height(), im.width(), im.channels());
    for (std::size_t i = 0; i < map.perturbation.size(); ++i) {
        pixels.values()[i] = a[map.perturbation[i]];
    }
    cex.image = clamp_to_image(std::move(pixels), im.p_max());
    const Image transformed = apply_sequence(im, query.transformations, cex.instantiations);
    cex.offsets = Tensor3(im.height(), im.width(), im.channels());
    for (std::size_t i = 0; i < cex.offsets.size(); ++i) {
        cex.offsets.values()[i] = cex.image.data().values()[i] - transformed.data().values()[i];
    }

    Replay r = replay(query.network, cex.image, query.label);
    if (!r.confirmed) {
        // Rounding in the solver's pixels can hide a violation the instantiation has.
        Tensor3 offsets = cex.offsets;
        for (double& o : offsets.values()) {
            o = std::clamp(o, -query.perturbation_radius, query.perturbation_radius);
        }
        const Image rebuilt = apply_perturbation(transformed, offsets, query.perturbation_radius);
        Replay r2 = replay(query.network, rebuilt, query.label);
        if (r2.confirmed) {
            cex.image = rebuilt;
            cex.offsets = offsets;
            r = std::move(r2);
            detail = "counterexample rebuilt from the extracted instantiation";
        }
    }
    cex.replay_confirmed = r.confirmed;
    cex.tie_only = r.tie_only;
    cex.logits = std::move(r.logits);
    cex.adversarial_label = r.adversarial;
    return cex;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Robust: return "robust";
        case Verdict::NotRobust: return "not_robust";
        case Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

std::string to_string(UndecidedReason r) {
    switch (r) {
        case UndecidedReason::None: return "";
        case UndecidedReason::Timeout: return "timeout";
        case UndecidedReason::NumericalMismatch: return "numerical_mismatch";
        case UndecidedReason::Error: return "error";
    }
    return "";
}

int violating_class(std::span<const double> logits, int label) {
    const auto l = static_cast<std::size_t>(label - 1);
    if (label < 1 || l >= logits.size()) {
        throw DomainError("label " + std::to_string(label) + " outside the logit range");
    }
    std::size_t best = logits.size();
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (j != l && (best == logits.size() || logits[j] > logits[best])) {
            best = j;
        }
    }
    if (best == logits.size() || logits[best] < logits[l] - 1e-9) {
        return 0;
    }
    return static_cast<int>(best) + 1;
}

VerificationOutcome verify(const VerificationQuery& query, const milp::SolverConfig& config,
                           milp::SolverBackend* backend) {
    const auto t0 = Clock::now();
    encoder::validate_query(query);
    config.validate();
    const encoder::EncodedQuery enc = encoder::encode_query(query);

    milp::BuiltinBackend builtin;
    milp::SolverBackend& solver = backend ? *backend : builtin;
    milp::SolveResult res = solver.solve(enc.model, config);

    VerificationOutcome out;
    out.label = query.label;
    out.stats = res.stats;
    out.detail = res.diagnostic;
    switch (res.status) {
        case milp::SolveStatus::Infeasible:
            out.verdict = Verdict::Robust;
            break;
        case milp::SolveStatus::TimedOut:
            out.verdict = Verdict::Undecided;
            out.reason = UndecidedReason::Timeout;
            break;
        case milp::SolveStatus::NumericalFailure:
            out.verdict = Verdict::Undecided;
            out.reason = UndecidedReason::NumericalMismatch;
            break;
        case milp::SolveStatus::Feasible: {
            Counterexample cex = interpret(query, enc.map, res.assignment, out.detail);
            if (!cex.replay_confirmed) {
                // The point satisfies the robustness rows only within the feasibility
                // tolerance (a near-tie). Ask once more for a point with a margin.
                milp::MilpModel strict = enc.model;
                const double margin = 100.0 * config.feasibility_tolerance;
                for (std::size_t i = 0; i < strict.constraints().size(); ++i) {
                    if (strict.constraint(i).tag == "C19") {
                        strict.shift_rhs(i, -margin);
                    }
                }
                milp::SolverConfig rest = config;
                rest.timeout_seconds = std::max(1e-3, config.timeout_seconds - since(t0));
                const milp::SolveResult again = solver.solve(strict, rest);
                out.stats.nodes += again.stats.nodes;
                out.stats.lp_solves += again.stats.lp_solves;
                out.stats.lp_iterations += again.stats.lp_iterations;
                if (again.status == milp::SolveStatus::Feasible) {
                    std::string detail;
                    Counterexample second = interpret(query, enc.map, again.assignment, detail);
                    if (second.replay_confirmed) {
                        cex = std::move(second);
                        out.detail = "counterexample found with a robustness margin";
                    }
                }
            }
            if (cex.replay_confirmed) {
                out.verdict = Verdict::NotRobust;
            } else {
                out.verdict = Verdict::Undecided;
                out.reason = UndecidedReason::NumericalMismatch;
                out.detail = "solver point does not replay as a misclassification";
            }
            out.counterexample = std::move(cex);
            break;
        }
    }
    out.seconds = since(t0);
    return out;
}

io::OutcomeDocument to_document(const std::string& name, const VerificationOutcome& o) {
    io::OutcomeDocument doc;
    doc.name = name;
    doc.verdict = to_string(o.verdict);
    doc.reason = to_string(o.reason);
    doc.label = o.label;
    if (o.counterexample) {
        const Counterexample& c = *o.counterexample;
        doc.adversarial_label = c.adversarial_label;
        doc.replay_confirmed = c.replay_confirmed;
        for (std::size_t t = 0; t < c.instantiations.size(); ++t) {
            doc.instantiation.push_back({c.kinds[t], c.instantiations[t].values});
        }
        doc.counterexample = c.image;
    }
    return doc;
}

VerificationOutcome from_document(const io::OutcomeDocument& doc) {
    VerificationOutcome o;
    o.label = doc.label;
    if (doc.verdict == "robust") {
        o.verdict = Verdict::Robust;
    } else if (doc.verdict == "not_robust") {
        o.verdict = Verdict::NotRobust;
    } else {
        o.verdict = Verdict::Undecided;
        o.reason = doc.reason == "timeout"              ? UndecidedReason::Timeout
                   : doc.reason == "numerical_mismatch" ? UndecidedReason::NumericalMismatch
                                                        : UndecidedReason::Error;
    }
    if (doc.counterexample) {
        Counterexample c;
        for (const auto& r : doc.instantiation) {
            c.kinds.push_back(r.kind);
            c.instantiations.push_back({r.values, {}});
        }
        c.image = *doc.counterexample;
        c.adversarial_label = doc.adversarial_label;
        c.replay_confirmed = doc.replay_confirmed;
        o.counterexample = std::move(c);
    }
    return o;
}

}  // namespace ltr::verifier
