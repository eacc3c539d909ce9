#include <chrono>
#include <random>

#include "ltr/core/errors.hpp"
#include "ltr/verifier/verifier.hpp"

namespace ltr::verifier {

namespace {

using Clock = std::chrono::steady_clock;

// Evaluates one instantiation; fills `out` and returns true on a violation.
bool try_instantiation(const VerificationQuery& q, const std::vector<Instantiation>& insts, const Tensor3* offsets,
                       VerificationOutcome& out) {
    Image im = apply_sequence(q.image, q.transformations, insts);
    if (offsets) {
        im = apply_perturbation(im, *offsets, q.perturbation_radius);
    }
    ++out.evaluations;
    const ForwardResult f = forward(q.network, im);
    const int other = violating_class(f.logits, q.label);
    if (other == 0) {
        return false;
    }
    Counterexample c;
    for (const auto& spec : q.transformations) {
        c.kinds.push_back(spec.kind);
    }
    c.instantiations = insts;
    c.offsets = offsets ? *offsets : Tensor3(im.height(), im.width(), im.channels());
    c.image = std::move(im);
    c.adversarial_label = f.label != q.label ? f.label : other;
    c.replay_confirmed = true;
    c.tie_only = f.label == q.label;
    c.logits = f.logits;
    out.verdict = Verdict::NotRobust;
    out.counterexample = std::move(c);
    return true;
}

}  // namespace

VerificationOutcome falsify_bruteforce(const VerificationQuery& query, int grid) {
    const auto t0 = Clock::now();
    encoder::validate_query(query);
    if (query.perturbation_radius > 0.0) {
        throw DomainError("brute-force falsification cannot enumerate a perturbation radius");
    }
    const Image& im = query.image;
    std::vector<Enumeration> domains;
    VerificationOutcome out;
    out.label = query.label;
    out.verdict = Verdict::Robust;
    for (const auto& spec : query.transformations) {
        domains.push_back(enumerate_instantiations(spec, grid, im.height(), im.width(), im.channels()));
        out.exhaustive = out.exhaustive && domains.back().exhaustive;
        if (domains.back().instantiations.empty()) {
            out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            return out;
        }
    }
    std::vector<std::size_t> digit(domains.size(), 0);
    std::vector<Instantiation> insts(domains.size());
    while (true) {
        for (std::size_t t = 0; t < domains.size(); ++t) {
            insts[t] = domains[t].instantiations[digit[t]];
        }
        // Clamped photometric points are outside what the MILP represents.
        if (sequence_within_pixel_range(im, query.transformations, insts) &&
            try_instantiation(query, insts, nullptr, out)) {
            break;
        }
        std::size_t t = domains.size();
        while (t > 0 && ++digit[t - 1] == domains[t - 1].instantiations.size()) {
            digit[--t] = 0;
        }
        if (t == 0) {
            break;
        }
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

VerificationOutcome falsify_random(const VerificationQuery& query, std::size_t samples, std::uint64_t seed) {
    const auto t0 = Clock::now();
    encoder::validate_query(query);
    const Image& im = query.image;
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::vector<double>>> points;
    for (const auto& spec : query.transformations) {
        points.push_back(spec.is_discrete() ? spec.discrete_points() : std::vector<std::vector<double>>{});
    }
    VerificationOutcome out;
    out.label = query.label;
    out.verdict = Verdict::Robust;
    out.exhaustive = false;
    const double rho = query.perturbation_radius;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Instantiation> insts(query.transformations.size());
    Tensor3 offsets(im.height(), im.width(), im.channels());
    std::size_t drawn = 0;
    for (std::size_t attempt = 0; drawn < samples && attempt < 50 * samples + 100; ++attempt) {
        for (std::size_t t = 0; t < insts.size(); ++t) {
            const TransformationSpec& spec = query.transformations[t];
            if (spec.kind == TransformKind::Photometric) {
                insts[t].values = {spec.contrast.lo + unit(rng) * (spec.contrast.hi - spec.contrast.lo),
                                   spec.luminosity.lo + unit(rng) * (spec.luminosity.hi - spec.luminosity.lo)};
            } else {
                insts[t].values = points[t][rng() % points[t].size()];
            }
        }
        if (!sequence_within_pixel_range(im, query.transformations, insts)) {
            continue;
        }
        ++drawn;
        if (rho > 0.0) {
            for (double& o : offsets.values()) {
                o = -rho + 2.0 * rho * unit(rng);
            }
        }
        if (try_instantiation(query, insts, rho > 0.0 ? &offsets : nullptr, out)) {
            break;
        }
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace ltr::verifier
