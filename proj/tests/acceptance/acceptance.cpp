// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
// usage: ltr_acceptance [artifact_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ltr/cli/cli.hpp"
#include "ltr/encoder/encoder.hpp"
#include "ltr/io/io.hpp"
#include "ltr/network/network.hpp"
#include "ltr/solver/solver.hpp"
#include "ltr/transforms/transforms.hpp"
#include "ltr/verifier/verifier.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace ltr;
using encoder::VerificationQuery;
using milp::SolveStatus;
using verifier::Verdict;

namespace {

const std::string kSource = LTR_SOURCE_DIR;

struct Result {
    bool pass = true;
    std::string note;

    // Keeps the first failure; later ones would only repeat it.
    void fail(const std::string& why) {
        if (pass) {
            note = why;
        }
        pass = false;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

class Artifacts {
public:
    explicit Artifacts(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    void write(const std::string& rel, const std::string& content) const {
        const fs::path p = root_ / rel;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << content;
    }
    void outcome(const std::string& rel, const verifier::VerificationOutcome& o) const {
        write(rel + ".json", io::serialize_outcome(verifier::to_document(rel, o)));
    }
    fs::path path(const std::string& rel) const { return root_ / rel; }

private:
    fs::path root_;
};

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VerificationQuery tiny_query(std::mt19937_64& rng, std::vector<TransformationSpec> specs, double scale = 1.0) {
    VerificationQuery q;
    q.network = oracle::random_tiny_cnn(rng);
    Image im = oracle::random_image(rng, 6, 6, 1);
    if (scale != 1.0) {
        Tensor3 t = im.data();
        for (double& v : t.values()) {
            v *= scale;
        }
        im = Image(t, 1.0);
    }
    q.image = im;
    q.label = forward(q.network, im).label;
    q.transformations = std::move(specs);
    return q;
}

const char* verdict_name(Verdict v) {
    return v == Verdict::Robust ? "robust" : v == Verdict::NotRobust ? "not_robust" : "undecided";
}

// Criteria 1 and 2: verify against exhaustive enumeration.
void against_enumeration(Result& r, const Artifacts& out, const std::string& tag, std::mt19937_64& rng, int count,
                         const TransformationSpec& spec, std::size_t evaluations, int& robust, double& worst) {
    for (int i = 0; i < count; ++i) {
        const auto q = tiny_query(rng, {spec});
        const auto t0 = std::chrono::steady_clock::now();
        const auto v = verifier::verify(q);
        worst = std::max(worst, since(t0));
        const auto b = verifier::falsify_bruteforce(q);
        out.outcome(fmt("%s/%03d", tag.c_str(), i), v);
        // Enumeration stops at the first violation, so only a robust verdict runs all of it.
        if (b.verdict == Verdict::Robust ? b.evaluations != evaluations : b.evaluations > evaluations) {
            r.fail(fmt("%s #%d: brute force ran %zu passes", tag.c_str(), i, b.evaluations));
        }
        if (v.verdict != b.verdict) {
            r.fail(fmt("%s #%d: verify %s, enumeration %s", tag.c_str(), i, verdict_name(v.verdict),
                       verdict_name(b.verdict)));
        }
        if (v.verdict == Verdict::NotRobust && !(v.counterexample && v.counterexample->replay_confirmed)) {
            r.fail(fmt("%s #%d: counterexample not replay-confirmed", tag.c_str(), i));
        }
        robust += v.verdict == Verdict::Robust;
    }
}

Result criterion1(const Artifacts& out) {
    Result r;
    std::mt19937_64 rng(1001);
    int robust = 0;
    double worst = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    against_enumeration(r, out, "c1", rng, 50, TransformationSpec::translation_box(-1, 1, -1, 1), 9, robust, worst);
    if (worst >= 10.0) {
        r.fail(fmt("slowest instance %.1f s", worst));
    }
    if (r.pass) {
        r.note = fmt("50 CNNs, %d robust / %d not robust, slowest %.3f s, total %.1f s", robust, 50 - robust, worst,
                     since(t0));
    }
    return r;
}

Result criterion2(const Artifacts& out) {
    Result r;
    std::mt19937_64 rng(1002);
    int robust_s = 0, robust_z = 0;
    double worst = 0.0;
    against_enumeration(r, out, "c2/subsample", rng, 50, TransformationSpec::subsample({2, 3}), 2, robust_s, worst);
    against_enumeration(r, out, "c2/zoom", rng, 50, TransformationSpec::zoom({2, 3}), 2, robust_z, worst);
    if (r.pass) {
        r.note = fmt("subsample %d/50 robust, zoom %d/50 robust, slowest %.3f s", robust_s, robust_z, worst);
    }
    return r;
}

Result criterion3(const Artifacts& out) {
    Result r;
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> mu_centre(0.9, 1.1), nu_lo(-0.06, 0.04);
    int robust = 0, found = 0;
    const int count = 40;
    for (int i = 0; i < count; ++i) {
        // Pixels scaled into [0, 0.85] so most of the box stays unclamped. Odd
        // instances are redrawn until a coarse grid already flips the label,
        // so that both directions of the check are exercised.
        VerificationQuery q;
        for (int attempt = 0; attempt < 2000; ++attempt) {
            const double c = mu_centre(rng), n = nu_lo(rng);
            q = tiny_query(rng, {TransformationSpec::photometric({c - 0.01, c + 0.01}, {n, n + 0.02})}, 0.85);
            if (i % 2 == 0 || verifier::falsify_bruteforce(q, 3).verdict == Verdict::NotRobust) {
                break;
            }
        }
        const auto v = verifier::verify(q);
        const auto g = verifier::falsify_bruteforce(q, 21);
        out.outcome(fmt("c3/%03d", i), v);
        if (v.verdict == Verdict::Undecided) {
            r.fail(fmt("#%d undecided: %s", i, v.detail.c_str()));
        }
        if (v.verdict == Verdict::Robust && g.verdict == Verdict::NotRobust) {
            r.fail(fmt("#%d: verify robust but the grid misclassifies", i));
        }
        if (g.verdict == Verdict::NotRobust && v.verdict != Verdict::NotRobust) {
            r.fail(fmt("#%d: grid misclassifies but verify says %s", i, verdict_name(v.verdict)));
        }
        robust += v.verdict == Verdict::Robust;
        found += g.verdict == Verdict::NotRobust;
    }
    if (r.pass) {
        r.note = fmt("%d instances, verify %d robust / %d not robust, grid found %d", count, robust, count - robust,
                     found);
    }
    return r;
}

std::size_t binary_count(const milp::MilpModel& m) {
    return static_cast<std::size_t>(std::count_if(m.variables().begin(), m.variables().end(),
                                                  [](const milp::Variable& v) { return v.kind == milp::VarKind::Binary; }));
}

bool feasible(const milp::MilpModel& m) { return milp::solve(m).status == SolveStatus::Feasible; }

// Feasibility of m with the extra row `var sense rhs`.
bool feasible_with(milp::MilpModel m, milp::VarId var, milp::Sense sense, double rhs) {
    milp::LinearExpr e;
    e.add(1.0, var);
    m.add_constraint(e, sense, rhs, "probe");
    return feasible(m);
}

Result criterion4(const Artifacts& out) {
    Result r;
    int cases = 0;
    // 2x2 window: every ordering of {1,2,3,4}.
    std::vector<double> vals{1, 2, 3, 4};
    do {
        milp::MilpModel m;
        std::vector<milp::VarId> window;
        encoder::BoundVector b(4);
        for (std::size_t k = 0; k < 4; ++k) {
            window.push_back(m.add_continuous("x" + std::to_string(k), vals[k], vals[k]));
            b.set(k, {vals[k], vals[k]});
        }
        // Loose bounds so the block, not the bounds, pins y.
        encoder::BoundVector loose(4, 0.0, 5.0);
        const auto pv = encoder::encode_maxpool_block(m, window, loose, "p");
        if (binary_count(m) != 2) {
            r.fail(fmt("2x2 block uses %zu binaries", binary_count(m)));
        }
        const auto res = milp::solve(m);
        if (res.status != SolveStatus::Feasible) {
            r.fail("2x2 block infeasible");
            continue;
        }
        if (std::abs(res.assignment[pv.y] - 4.0) > 1e-6) {
            r.fail(fmt("2x2 block gives y = %g", res.assignment[pv.y]));
        }
        if (feasible_with(m, pv.y, milp::Sense::GreaterEqual, 4.0 + 1e-4) ||
            feasible_with(m, pv.y, milp::Sense::LessEqual, 4.0 - 1e-4)) {
            r.fail("2x2 block does not force y = 4");
        }
        out.write(fmt("c4/pool2x2_%d%d%d%d.lp", int(vals[0]), int(vals[1]), int(vals[2]), int(vals[3])),
                  milp::export_lp(m));
        ++cases;
    } while (std::next_permutation(vals.begin(), vals.end()));

    // 1x3 window: code 3 has no position and must be excluded.
    std::vector<double> three{1, 2, 3};
    do {
        for (int code = 0; code < 4; ++code) {
            milp::MilpModel m;
            std::vector<milp::VarId> window;
            for (std::size_t k = 0; k < 3; ++k) {
                window.push_back(m.add_continuous("x" + std::to_string(k), three[k], three[k]));
            }
            const auto pv = encoder::encode_maxpool_block(m, window, encoder::BoundVector(3, 0.0, 4.0), "p");
            if (pv.codes.size() != 2) {
                r.fail(fmt("1x3 block uses %zu code bits", pv.codes.size()));
                break;
            }
            for (std::size_t bit = 0; bit < 2; ++bit) {
                const double v = (code >> bit) & 1;
                m.tighten_bounds(pv.codes[bit], v, v);
            }
            const bool expect = code < 3 && three[static_cast<std::size_t>(code)] == 3.0;
            if (feasible(m) != expect) {
                r.fail(fmt("1x3 block, code %d: feasibility %d, expected %d", code, !expect, expect));
            }
        }
        ++cases;
    } while (std::next_permutation(three.begin(), three.end()));
    if (r.pass) {
        r.note = fmt("24 orderings of a 2x2 window, %d of a 1x3 window with all 4 codes", cases - 24);
    }
    return r;
}

Result criterion5(const Artifacts& out) {
    Result r;
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> unit(0.0, 1.0), wide(-5.0, 5.0);
    std::size_t sampled = 0, with_binary = 0;
    std::string log;
    for (int i = 0; i < 200; ++i) {
        double lo = wide(rng), hi = wide(rng);
        if (lo > hi) {
            std::swap(lo, hi);
        }
        if (i % 10 == 0) {
            lo = std::abs(lo);  // some provably active or inactive nodes
            hi = lo + unit(rng);
        } else if (i % 10 == 1) {
            hi = -std::abs(hi);
            lo = hi - unit(rng);
        }
        milp::MilpModel m;
        const auto ws = m.add_continuous("ws", lo, hi);
        const auto rv = encoder::encode_relu(m, ws, encoder::widen({lo, hi}), "n");
        with_binary += rv.inactive.has_value();
        log += fmt("%d %.17g %.17g %d\n", i, lo, hi, int(rv.inactive.has_value()));

        // Candidate points around the graph of max(0, ws); any that the rows
        // accept must lie on it.
        for (int s = 0; s < 30; ++s) {
            const double x = lo + (hi - lo) * unit(rng);
            const double relu = std::max(0.0, x);
            for (double y : {relu, x, 0.0, relu + 1e-3, relu - 1e-3, lo + (hi - lo) * unit(rng), hi * unit(rng)}) {
                for (double a : {0.0, 1.0}) {
                    if (!rv.inactive && a == 1.0) {
                        continue;
                    }
                    milp::Assignment pt;
                    pt.values.assign(m.variable_count(), 0.0);
                    pt[ws] = x;
                    pt[rv.y] = y;
                    if (rv.inactive) {
                        pt[*rv.inactive] = a;
                    }
                    if (milp::check_assignment(m, pt, {1e-9, 1e-9}).empty()) {
                        ++sampled;
                        if (std::abs(y - relu) > 1e-6) {
                            r.fail(fmt("#%d: feasible point ws=%g y=%g", i, x, y));
                        }
                    }
                }
            }
        }

        // Pinning ws leaves exactly one y.
        const double x = lo + (hi - lo) * unit(rng);
        const double relu = std::max(0.0, x);
        auto pinned = m;
        pinned.tighten_bounds(ws, x, x);
        const auto res = milp::solve(pinned);
        if (res.status != SolveStatus::Feasible || std::abs(res.assignment[rv.y] - relu) > 1e-6) {
            r.fail(fmt("#%d: pinned ws=%g does not give y=%g", i, x, relu));
            continue;
        }
        if (feasible_with(pinned, rv.y, milp::Sense::GreaterEqual, relu + 1e-4) ||
            feasible_with(pinned, rv.y, milp::Sense::LessEqual, relu - 1e-4)) {
            r.fail(fmt("#%d: y is not unique at ws=%g", i, x));
        }
    }
    out.write("c5/instances.txt", log);
    if (sampled == 0) {
        r.fail("no feasible sample");
    }
    if (r.pass) {
        r.note = fmt("200 nodes (%zu unstable), %zu feasible samples on the graph", with_binary, sampled);
    }
    return r;
}

// Random instantiation of one spec; photometric draws from the box.
Instantiation sample(const TransformationSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (spec.kind == TransformKind::Photometric) {
        return {{spec.contrast.lo + (spec.contrast.hi - spec.contrast.lo) * unit(rng),
                 spec.luminosity.lo + (spec.luminosity.hi - spec.luminosity.lo) * unit(rng)},
                {}};
    }
    const auto pts = spec.discrete_points();
    return {pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)], {}};
}

Result criterion6(const Artifacts& out) {
    Result r;
    std::mt19937_64 rng(1006);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t compared = 0;
    for (int i = 0; i < 50; ++i) {
        std::vector<TransformationSpec> specs;
        double rho = 0.0;
        switch (i % 5) {
            case 0:
                specs = {TransformationSpec::translation_box(-1, 1, -1, 1)};
                break;
            case 1:
                specs = {TransformationSpec::subsample({2, 3})};
                break;
            case 2:
                specs = {TransformationSpec::zoom({2, 3})};
                break;
            case 3:
                specs = {TransformationSpec::photometric({0.9, 1.1}, {-0.05, 0.05}),
                         TransformationSpec::translation_box(-1, 1, -1, 1)};
                break;
            default:
                specs = {TransformationSpec::translation_box(-1, 1, 0, 1)};
                rho = 0.03;
                break;
        }
        auto q = tiny_query(rng, specs, 0.8);
        q.perturbation_radius = rho;
        const auto eq = encoder::encode_query(q);
        // Drop the property rows so the pinned model stays feasible.
        milp::MilpModel core;
        for (const auto& v : eq.model.variables()) {
            if (v.kind == milp::VarKind::Binary) {
                core.add_binary(v.name);
            } else {
                core.add_continuous(v.name, v.lo, v.hi);
            }
        }
        for (const auto& c : eq.model.constraints()) {
            if (c.tag != "C19" && c.tag != "C20") {
                core.add_constraint(c.expr, c.sense, c.rhs, c.tag);
            }
        }
        std::vector<Instantiation> insts;
        for (int attempt = 0; attempt < 50; ++attempt) {
            insts.clear();
            for (const auto& s : specs) {
                insts.push_back(sample(s, rng));
            }
            if (sequence_within_pixel_range(q.image, specs, insts)) {
                break;
            }
        }
        if (!sequence_within_pixel_range(q.image, specs, insts)) {
            r.fail(fmt("#%d: no unclamped instantiation drawn", i));
            continue;
        }
        Image x = apply_sequence(q.image, specs, insts);
        if (rho > 0.0) {
            Tensor3 off(6, 6, 1);
            for (double& v : off.values()) {
                v = -rho + 2.0 * rho * unit(rng);
            }
            x = apply_perturbation(x, off, rho);
        }
        encoder::pin_instantiation(core, eq.map, insts, rho > 0.0 ? &x.data() : nullptr);
        out.write(fmt("c6/%03d.lp", i), milp::export_lp(core));
        const auto res = milp::solve(core);
        if (res.status != SolveStatus::Feasible) {
            r.fail(fmt("#%d: pinned model %s", i, milp::to_string(res.status).c_str()));
            continue;
        }
        auto expect = [&](milp::VarId id, double want, const char* what) {
            ++compared;
            if (std::abs(res.assignment[id] - want) > 1e-6) {
                r.fail(fmt("#%d: %s %g vs trace %g", i, what, res.assignment[id], want));
            }
        };
        Image stage = q.image;
        for (std::size_t t = 0; t < specs.size(); ++t) {
            stage = apply(stage, specs[t], insts[t]);
            for (std::size_t k = 0; k < eq.map.transforms[t].output.size(); ++k) {
                expect(eq.map.transforms[t].output[k], stage.data().values()[k], "transform output");
            }
        }
        for (std::size_t k = 0; k < eq.map.perturbation.size(); ++k) {
            expect(eq.map.perturbation[k], x.data().values()[k], "perturbation");
        }
        const auto fr = forward(q.network, x);
        for (std::size_t l = 0; l < fr.trace.size(); ++l) {
            const auto& lv = eq.map.layers[l];
            for (std::size_t k = 0; k < fr.trace[l].linear.size(); ++k) {
                expect(lv.linear[k], fr.trace[l].linear[k], "linear");
            }
            for (std::size_t k = 0; k < lv.rectified.size(); ++k) {
                expect(lv.rectified[k], fr.trace[l].rectified[k], "rectified");
            }
            for (std::size_t k = 0; k < fr.trace[l].output.size(); ++k) {
                expect(lv.output[k], fr.trace[l].output[k], "layer output");
            }
        }
    }
    if (r.pass) {
        r.note = fmt("50 queries, %zu variables matched the forward trace", compared);
    }
    return r;
}

Result criterion7(const Artifacts& out) {
    Result r;
    std::mt19937_64 rng(1007);
    int feas = 0;
    std::string log;
    for (int i = 0; i < 100; ++i) {
        const std::size_t bins = 1 + static_cast<std::size_t>(i) % 12;
        const auto m = oracle::random_milp(rng, bins, 2, 3 + static_cast<std::size_t>(i) % 7);
        const bool expected = oracle::milp_feasible_by_enumeration(m);
        const auto res = milp::solve(m);
        out.write(fmt("c7/%03d.lp", i), milp::export_lp(m));
        log += fmt("%03d %s\n", i, milp::to_string(res.status).c_str());
        if (res.status != SolveStatus::Feasible && res.status != SolveStatus::Infeasible) {
            r.fail(fmt("#%d: %s", i, milp::to_string(res.status).c_str()));
            continue;
        }
        if ((res.status == SolveStatus::Feasible) != expected) {
            r.fail(fmt("#%d: solver %s, enumeration %s", i, milp::to_string(res.status).c_str(),
                       expected ? "feasible" : "infeasible"));
        }
        if (res.status == SolveStatus::Feasible && !milp::check_assignment(m, res.assignment, {1e-6, 1e-6}).empty()) {
            r.fail(fmt("#%d: assignment fails the check", i));
        }
        feas += expected;
    }
    out.write("c7/status.txt", log);
    if (r.pass) {
        r.note = fmt("100 models, <= 12 binaries, %d feasible / %d infeasible", feas, 100 - feas);
    }
    return r;
}

Result criterion8(const Artifacts& out) {
    Result r;
    const std::string net_path = kSource + "/data/mnist14_net.json";
    const std::string img_path = kSource + "/data/mnist14_test_images.idx";
    const auto net = io::load_network(net_path);
    // Weighted-sum nodes plus pooled nodes where a pool shrinks the layer.
    std::size_t nodes = 0;
    for (const auto& t : forward(net, Tensor3(net.input_height, net.input_width,
                                              net.input_channels)).trace) {
        nodes += t.linear.size() + (t.output.size() != t.linear.size() ? t.output.size() : 0);
    }
    if (nodes > 300) {
        r.fail(fmt("network has %zu nodes", nodes));
    }
    const auto labels = io::parse_idx_labels(io::read_file(kSource + "/data/mnist14_test_labels.idx"));

    std::vector<verifier::BatchQuery> batch;
    for (std::size_t idx = 0; idx < labels.size() && batch.size() < 20; ++idx) {
        io::QueryDocument doc;
        doc.network_path = net_path;
        doc.image_path = img_path;
        doc.image_index = idx;
        doc.normalize = true;
        doc.transformations = {TransformationSpec::translation_box(-1, 1, -1, 1)};
        auto q = cli::materialize(doc, kSource);
        if (forward(q.network, q.image).label != labels[idx]) {
            continue;
        }
        q.label = labels[idx];
        milp::SolverConfig cfg;
        cfg.timeout_seconds = 200.0;
        batch.push_back({fmt("mnist_%03zu", idx), "translation[-1,1]x[-1,1]", q, cfg});
    }
    if (batch.size() < 20) {
        r.fail(fmt("only %zu correctly classified images", batch.size()));
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto items = verifier::batch_verify(batch, 1);
    const double total = since(t0);
    int robust = 0;
    double worst = 0.0;
    std::vector<verifier::ExportItem> exports;
    for (std::size_t k = 0; k < items.size(); ++k) {
        const auto& o = items[k].outcome;
        out.outcome("c8/" + items[k].name, o);
        worst = std::max(worst, o.seconds);
        exports.push_back({batch[k].query.label, o});
        if (o.verdict == Verdict::Undecided) {
            r.fail(items[k].name + " undecided: " + o.detail);
        } else if (o.verdict == Verdict::NotRobust) {
            if (!(o.counterexample && o.counterexample->replay_confirmed)) {
                r.fail(items[k].name + ": counterexample not replay-confirmed");
            }
        } else {
            ++robust;
            const auto f = verifier::falsify_random(batch[k].query, 1000, 8000 + k);
            if (f.verdict == Verdict::NotRobust) {
                r.fail(items[k].name + ": random falsification broke a robust verdict");
            }
        }
    }
    verifier::export_adversarial_set(exports, out.path("c8/adversarial").string());
    if (total > 1800.0) {
        r.fail(fmt("batch took %.0f s", total));
    }
    if (r.pass) {
        r.note = fmt("%zu-node net, 20 images, %d robust / %d not robust, slowest %.2f s, total %.1f s", nodes,
                     robust, 20 - robust, worst, total);
    }
    return r;
}

bool highspy_available() { return std::system("python3 -c \"import highspy\" >/dev/null 2>&1") == 0; }

Result criterion9(const fs::path& work) {
    Result r;
    if (!highspy_available()) {
        r.note = "skipped: no external LP solver (python3 highspy) installed";
        return r;
    }
    std::vector<milp::MilpModel> models;
    for (const auto& e : fs::directory_iterator(kSource + "/tests/data/cli/queries")) {
        const auto doc = io::load_query(e.path().string());
        models.push_back(encoder::encode_query(cli::materialize(doc, e.path().parent_path().string())).model);
    }
    std::mt19937_64 rng(1009);
    while (models.size() < 10) {
        const auto spec = models.size() % 2 ? TransformationSpec::translation_box(-1, 1, -1, 1)
                                            : TransformationSpec::zoom({2, 3});
        models.push_back(encoder::encode_query(tiny_query(rng, {spec})).model);
    }
    fs::create_directories(work);
    milp::ExternalLpBackend ext("python3 " + kSource + "/tools/highs_solve.py {lp} {sol} {timeout}", work.string());
    milp::BuiltinBackend builtin;
    milp::SolverConfig cfg;
    cfg.timeout_seconds = 60.0;
    int feas = 0;
    for (std::size_t k = 0; k < models.size(); ++k) {
        const auto a = builtin.solve(models[k], cfg);
        const auto b = ext.solve(models[k], cfg);
        if (a.status != b.status) {
            r.fail(fmt("model %zu: builtin %s, external %s", k, milp::to_string(a.status).c_str(),
                       milp::to_string(b.status).c_str()));
        }
        feas += a.status == SolveStatus::Feasible;
    }
    if (r.pass) {
        r.note = fmt("10 models through HiGHS, %d feasible / %d infeasible on both", feas, 10 - feas);
    }
    return r;
}

using Run = std::vector<Result>;

Run run_core(const Artifacts& out) {
    return {criterion1(out), criterion2(out), criterion3(out), criterion4(out),
            criterion5(out), criterion6(out), criterion7(out), criterion8(out)};
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            files.emplace_back(fs::relative(e.path(), root).string(), ss.str());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

Result criterion10(const Run& first, const fs::path& a, const Artifacts& second_out, std::size_t& file_count) {
    Result r;
    const Run second = run_core(second_out);
    for (std::size_t k = 0; k < first.size(); ++k) {
        if (first[k].pass != second[k].pass || first[k].note.substr(0, first[k].note.find("slowest")) !=
                                                   second[k].note.substr(0, second[k].note.find("slowest"))) {
            r.fail(fmt("criterion %zu differs between runs", k + 1));
        }
    }
    const auto x = snapshot(a), y = snapshot(second_out.path(""));
    file_count = x.size();
    if (x.size() != y.size()) {
        r.fail(fmt("%zu vs %zu exported files", x.size(), y.size()));
    } else {
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k] != y[k]) {
                r.fail("differs: " + x[k].first);
            }
        }
    }
    if (r.pass) {
        r.note = fmt("criteria 1-8 rerun, %zu exported files identical", file_count);
    }
    return r;
}

void report(int id, const Result& r) {
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.note << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ltr_acceptance";
    fs::remove_all(root);
    const Artifacts first_out(root / "run1"), second_out(root / "run2");
    bool ok = true;
    try {
        const Run first = run_core(first_out);
        for (std::size_t k = 0; k < first.size(); ++k) {
            report(static_cast<int>(k) + 1, first[k]);
            ok = ok && first[k].pass;
        }
        const auto c9 = criterion9(root / "external");
        report(9, c9);
        std::size_t files = 0;
        const auto c10 = criterion10(first, root / "run1", second_out, files);
        report(10, c10);
        ok = ok && c9.pass && c10.pass;
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << std::endl;
        return 2;
    }
    return ok ? 0 : 1;
}
