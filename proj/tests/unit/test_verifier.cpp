#include <doctest.h>

#include <filesystem>
#include <random>

#include "ltr/core/errors.hpp"
#include "ltr/verifier/verifier.hpp"
#include "support/oracles.hpp"

using namespace ltr;
using namespace ltr::verifier;

namespace {

// Input 2x1x1. Logit 1 reads pixel (1,0), logit 2 reads pixel (0,0), through an identity ReLU layer.
Network flip_network() {
    Network net;
    net.input_height = 2;
    net.input_width = 1;
    net.input_channels = 1;
    net.class_count = 2;
    net.layers.push_back(FullyConnectedLayer{2, 2, {1, 0, 0, 1}, {0, 0}, Activation::Relu});
    net.layers.push_back(FullyConnectedLayer{2, 2, {0, 1, 1, 0}, {0, 0}, Activation::ArgMax});
    return net;
}

VerificationQuery flip_query(std::vector<std::pair<int, int>> shifts) {
    VerificationQuery q;
    q.network = flip_network();
    Tensor3 t(2, 1, 1);
    t.at(1, 0, 0) = 1.0;
    q.image = Image(t, 1.0);
    q.label = 1;
    q.transformations = {TransformationSpec::translation(std::move(shifts))};
    return q;
}

Network constant_network(std::size_t side, std::vector<double> bias) {
    Network net;
    net.input_height = side;
    net.input_width = side;
    net.input_channels = 1;
    net.class_count = bias.size();
    net.layers.push_back(
        FullyConnectedLayer{bias.size(), side * side, std::vector<double>(bias.size() * side * side, 0.0), bias,
                            Activation::ArgMax});
    return net;
}

VerificationQuery random_query(std::mt19937_64& rng, TransformationSpec spec) {
    VerificationQuery q;
    q.network = oracle::random_tiny_cnn(rng);
    q.image = oracle::random_image(rng, 6, 6, 1);
    q.label = forward(q.network, q.image).label;
    q.transformations = {std::move(spec)};
    return q;
}

}  // namespace

TEST_CASE("flip network: shifting the pixel changes the class") {
    const VerificationQuery q = flip_query({{0, 0}, {1, 0}});
    const VerificationOutcome v = verify(q);
    REQUIRE(v.verdict == Verdict::NotRobust);
    REQUIRE(v.counterexample);
    CHECK(v.counterexample->instantiations[0].values == std::vector<double>{1, 0});
    CHECK(v.counterexample->adversarial_label == 2);
    CHECK(v.counterexample->replay_confirmed);
    CHECK_FALSE(v.counterexample->tie_only);

    const VerificationOutcome b = falsify_bruteforce(q);
    REQUIRE(b.verdict == Verdict::NotRobust);
    CHECK(b.counterexample->instantiations[0].values == std::vector<double>{1, 0});
    CHECK(b.evaluations == 2);
}

TEST_CASE("identity domain on a margin-positive image is robust") {
    const VerificationQuery q = flip_query({{0, 0}});
    CHECK(verify(q).verdict == Verdict::Robust);
    CHECK(falsify_bruteforce(q).verdict == Verdict::Robust);
}

TEST_CASE("brute force runs one forward pass per lattice point") {
    VerificationQuery q;
    q.network = constant_network(3, {1.0, 0.0});
    q.image = Image(Tensor3(3, 3, 1, 0.5), 1.0);
    q.label = 1;
    q.transformations = {TransformationSpec::translation_box(-1, 1, -1, 1)};
    const VerificationOutcome b = falsify_bruteforce(q);
    CHECK(b.verdict == Verdict::Robust);
    CHECK(b.evaluations == 9);
    CHECK(b.exhaustive);
    CHECK(verify(q).verdict == Verdict::Robust);
}

TEST_CASE("a logit tie counts as a violation") {
    VerificationQuery q;
    q.network = constant_network(2, {0.5, 0.5, 0.0});
    q.image = Image(Tensor3(2, 2, 1, 0.25), 1.0);
    q.label = 1;
    q.transformations = {TransformationSpec::translation({{0, 0}})};
    CHECK(forward(q.network, q.image).label == 1);
    const VerificationOutcome v = verify(q);
    REQUIRE(v.verdict == Verdict::NotRobust);
    CHECK(v.counterexample->tie_only);
    CHECK(v.counterexample->adversarial_label == 2);
    CHECK(falsify_bruteforce(q).verdict == Verdict::NotRobust);
}

TEST_CASE("violating_class picks the strongest rival") {
    const std::vector<double> logits{1.0, 0.5, 1.0 - 1e-12, 0.2};
    CHECK(violating_class(logits, 1) == 3);
    CHECK(violating_class(logits, 2) == 1);
    const std::vector<double> clear{2.0, 0.5, 1.0};
    CHECK(violating_class(clear, 1) == 0);
    CHECK_THROWS_AS(violating_class(clear, 4), DomainError);
}

TEST_CASE("brute force refuses perturbations") {
    VerificationQuery q = flip_query({{0, 0}});
    q.perturbation_radius = 0.1;
    CHECK_THROWS_AS(falsify_bruteforce(q), DomainError);
}

TEST_CASE("perturbation radius: verify finds what random search finds") {
    VerificationQuery q = flip_query({{0, 0}});
    q.image = Image(Tensor3(2, 1, 1, std::vector<double>{0.45, 0.55}), 1.0);
    q.perturbation_radius = 0.06;
    const VerificationOutcome v = verify(q);
    INFO(to_string(v.reason) << " " << v.detail);
    REQUIRE(v.verdict == Verdict::NotRobust);
    CHECK(v.counterexample->replay_confirmed);
    for (double o : v.counterexample->offsets.values()) {
        CHECK(std::abs(o) <= 0.06 + 1e-9);
    }
    q.perturbation_radius = 0.04;
    CHECK(verify(q).verdict == Verdict::Robust);
    CHECK(falsify_random(q, 500, 1).verdict == Verdict::Robust);
}

TEST_CASE("verify agrees with brute force on random tiny instances") {
    std::mt19937_64 rng(515);
    int not_robust = 0;
    for (int trial = 0; trial < 24; ++trial) {
        TransformationSpec spec = trial % 3 == 0   ? TransformationSpec::translation_box(-1, 1, -1, 1)
                                  : trial % 3 == 1 ? TransformationSpec::subsample({2, 3})
                                                   : TransformationSpec::zoom({2, 3});
        const VerificationQuery q = random_query(rng, spec);
        const VerificationOutcome v = verify(q);
        const VerificationOutcome b = falsify_bruteforce(q);
        INFO("trial " << trial);
        REQUIRE(v.verdict != Verdict::Undecided);
        CHECK(v.verdict == b.verdict);
        if (v.verdict == Verdict::NotRobust) {
            ++not_robust;
            CHECK(v.counterexample->replay_confirmed);
        }
    }
    CHECK(not_robust > 0);
}

TEST_CASE("enlarging the domain never turns a counterexample into robustness") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        VerificationQuery small = random_query(rng, TransformationSpec::translation_box(0, 1, 0, 0));
        VerificationQuery big = small;
        big.transformations = {TransformationSpec::translation_box(-1, 1, -1, 1)};
        if (verify(small).verdict == Verdict::NotRobust) {
            CHECK(verify(big).verdict == Verdict::NotRobust);
        }
    }
}

TEST_CASE("report rows follow the table layout") {
    auto item = [](std::string domain, Verdict v, double s) {
        BatchItem it;
        it.domain = std::move(domain);
        it.outcome.verdict = v;
        it.outcome.seconds = s;
        if (v == Verdict::Undecided) {
            it.outcome.reason = UndecidedReason::Timeout;
        }
        return it;
    };
    const std::vector<BatchItem> items{
        item("translation[-1,1]x[-1,1]", Verdict::Robust, 1.0),
        item("subsample[2,3]", Verdict::Robust, 0.125),
        item("translation[-1,1]x[-1,1]", Verdict::NotRobust, 1.5),
        item("translation[-1,1]x[-1,1]", Verdict::Undecided, 200.0),
        item("zoom[2,3]", Verdict::Undecided, 200.0),
    };
    const auto rows = summarize(items);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].verified == 2);
    CHECK(rows[0].ltr == 1);
    CHECK(format_report(rows) == io::read_file(std::string(LTR_GOLDEN_DIR) + "/batch_report.tsv"));
}

TEST_CASE("batch keeps input order across threads and isolates failures") {
    std::vector<BatchQuery> qs;
    for (int i = 0; i < 5; ++i) {
        BatchQuery bq;
        bq.name = "q" + std::to_string(i);
        bq.domain = i % 2 ? "shift" : "identity";
        bq.query = flip_query(i % 2 ? std::vector<std::pair<int, int>>{{0, 0}, {1, 0}}
                                    : std::vector<std::pair<int, int>>{{0, 0}});
        qs.push_back(bq);
    }
    qs[4].query.label = 7;
    const auto items = batch_verify(qs, 3);
    REQUIRE(items.size() == 5);
    for (int i = 0; i < 4; ++i) {
        CHECK(items[i].name == "q" + std::to_string(i));
        CHECK(items[i].outcome.verdict == (i % 2 ? Verdict::NotRobust : Verdict::Robust));
    }
    CHECK(items[4].outcome.reason == UndecidedReason::Error);
    const auto rows = summarize(items);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].domain == "identity");
    CHECK(rows[0].verified == 2);
    CHECK(rows[1].ltr == 0);
}

TEST_CASE("adversarial export writes images that replay") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ltr_export_test";
    fs::remove_all(dir);
    CHECK(export_adversarial_set({}, dir.string()) == 0);
    CHECK(io::read_file((dir / "manifest.tsv").string()).empty());

    const VerificationQuery q = flip_query({{0, 0}, {1, 0}});
    const VerificationOutcome v = verify(q);
    CHECK(export_adversarial_set({{1, v}, {1, verify(flip_query({{0, 0}}))}}, dir.string()) == 1);
    const std::string manifest = io::read_file((dir / "manifest.tsv").string());
    CHECK(manifest == "adv_0000.json\t1\t2\ttranslation(1,0)\n");
    const Image back = io::load_image((dir / "adv_0000.json").string());
    CHECK(back == v.counterexample->image);
    CHECK(forward(q.network, back).label == 2);
    CHECK(fs::exists(dir / "adv_0000.pgm"));
    fs::remove_all(dir);
}

TEST_CASE("outcome documents round trip through json") {
    const VerificationOutcome v = verify(flip_query({{0, 0}, {1, 0}}));
    const io::OutcomeDocument doc = to_document("flip", v);
    CHECK(doc.verdict == "not_robust");
    CHECK(io::parse_outcome(io::serialize_outcome(doc)) == doc);
    const VerificationOutcome back = from_document(doc);
    CHECK(back.verdict == Verdict::NotRobust);
    CHECK(back.counterexample->image == v.counterexample->image);
    CHECK(to_document("flip", back) == doc);
}
