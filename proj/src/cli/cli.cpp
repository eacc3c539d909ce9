#include "ltr/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "ltr/core/errors.hpp"

namespace ltr::cli {

namespace fs = std::filesystem;

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string factor_set(const std::vector<int>& f) {
    bool run = f.size() > 1;
    for (std::size_t i = 1; i < f.size(); ++i) {
        run = run && f[i] == f[i - 1] + 1;
    }
    if (run) {
        return "[" + std::to_string(f.front()) + "," + std::to_string(f.back()) + "]";
    }
    std::string s = "{";
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += (i ? "," : "") + std::to_string(f[i]);
    }
    return s + "}";
}

int as_int(double v, const std::string& what) {
    if (v != std::floor(v) || std::abs(v) > 1e6) {
        throw ParseError(what + ": expected integers");
    }
    return static_cast<int>(v);
}

std::vector<int> factor_range(const std::string& text, const std::string& what) {
    const auto v = parse_list(text, 2);
    const int lo = as_int(v[0], what), hi = as_int(v[1], what);
    if (lo > hi || hi - lo > 4096) {
        throw ParseError(what + ": expected lo,hi with lo <= hi");
    }
    std::vector<int> f;
    for (int d = lo; d <= hi; ++d) {
        f.push_back(d);
    }
    return f;
}

io::ImageFormat format_for(const std::string& path, bool ascii) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".json") {
        return io::ImageFormat::Json;
    }
    if (ext == ".idx" || ext == ".idx3-ubyte") {
        return io::ImageFormat::Idx;
    }
    return ascii ? io::ImageFormat::PgmAscii : io::ImageFormat::PgmBinary;
}

// Flags shared by verify, falsify and encode.
struct Inputs {
    std::string query;
    std::string network;
    std::string image;
    std::size_t index = 0;
    int label = 0;
    bool normalize = false;
    std::string translate, subsample, zoom, photometric;
    std::optional<double> rho;
    std::optional<double> timeout;
    std::string branching;
    std::optional<std::size_t> node_limit;
    std::string external;
    std::string workdir;

    void attach(CLI::App* app, bool solver_flags) {
        app->add_option("--query", query, "query document (JSON)");
        app->add_option("--network", network, "network document (JSON)");
        app->add_option("--image", image, "image (PGM, IDX or JSON)");
        app->add_option("--index", index, "image index inside an IDX file");
        app->add_option("--label", label, "expected class (1-based); default: the network's prediction");
        app->add_flag("--normalize", normalize, "divide pixels by p_max");
        app->add_option("--translate", translate, "tx_lo,tx_hi,ty_lo,ty_hi");
        app->add_option("--subsample", subsample, "lo,hi");
        app->add_option("--zoom", zoom, "lo,hi");
        app->add_option("--photometric", photometric, "mu_lo,mu_hi,nu_lo,nu_hi");
        app->add_option("--rho", rho, "perturbation radius");
        if (solver_flags) {
            app->add_option("--timeout", timeout, "seconds (default 200)");
            app->add_option("--branching", branching, "most_fractional | first_fractional");
            app->add_option("--node-limit", node_limit, "branch-and-bound node limit");
            app->add_option("--external", external, "external LP solver command ({lp}, {sol}, {timeout})");
            app->add_option("--workdir", workdir, "scratch directory for the external solver");
        }
    }

    bool inline_domain() const {
        return !translate.empty() || !subsample.empty() || !zoom.empty() || !photometric.empty();
    }

    std::vector<TransformationSpec> inline_specs() const {
        std::vector<TransformationSpec> specs;
        if (!photometric.empty()) {
            const auto v = parse_list(photometric, 4);
            specs.push_back(TransformationSpec::photometric({v[0], v[1]}, {v[2], v[3]}));
        }
        if (!translate.empty()) {
            const auto v = parse_list(translate, 4);
            specs.push_back(TransformationSpec::translation_box(
                as_int(v[0], "--translate"), as_int(v[1], "--translate"), as_int(v[2], "--translate"),
                as_int(v[3], "--translate")));
        }
        if (!subsample.empty()) {
            specs.push_back(TransformationSpec::subsample(factor_range(subsample, "--subsample")));
        }
        if (!zoom.empty()) {
            specs.push_back(TransformationSpec::zoom(factor_range(zoom, "--zoom")));
        }
        return specs;
    }

    io::QueryDocument document(std::string& base_dir) const {
        io::QueryDocument doc;
        base_dir = ".";
        if (!query.empty()) {
            doc = io::load_query(query);
            base_dir = fs::path(query).parent_path().string();
        }
        // Command-line paths are relative to the working directory.
        if (!network.empty()) {
            doc.network_path = fs::absolute(network).string();
        }
        if (!image.empty()) {
            doc.image_path = fs::absolute(image).string();
            doc.image_index = index;
        }
        if (doc.network_path.empty() || doc.image_path.empty()) {
            throw CLI::ValidationError("inputs", "--query or both --network and --image are required");
        }
        if (label) {
            doc.label = label;
        }
        doc.normalize = doc.normalize || normalize;
        if (inline_domain()) {
            doc.transformations = inline_specs();
            doc.domain.clear();
        }
        if (rho) {
            doc.rho = *rho;
        }
        if (timeout) {
            doc.solver.timeout_seconds = *timeout;
        }
        if (!branching.empty()) {
            if (branching == "most_fractional") {
                doc.solver.branching_rule = milp::BranchingRule::MostFractional;
            } else if (branching == "first_fractional") {
                doc.solver.branching_rule = milp::BranchingRule::FirstFractional;
            } else {
                throw CLI::ValidationError("--branching", "unknown rule '" + branching + "'");
            }
        }
        if (node_limit) {
            doc.solver.node_limit = *node_limit;
        }
        return doc;
    }

    std::unique_ptr<milp::SolverBackend> backend() const {
        if (external.empty()) {
            return nullptr;
        }
        const std::string dir = workdir.empty() ? fs::temp_directory_path().string() : workdir;
        return std::make_unique<milp::ExternalLpBackend>(external, dir);
    }
};

std::string verdict_line(const verifier::VerificationOutcome& o) {
    switch (o.verdict) {
        case verifier::Verdict::Robust: return "Robust";
        case verifier::Verdict::NotRobust: return "NotRobust";
        case verifier::Verdict::Undecided: return "Undecided (" + verifier::to_string(o.reason) + ")";
    }
    return "Undecided";
}

int exit_for(const verifier::VerificationOutcome& o) {
    switch (o.verdict) {
        case verifier::Verdict::Robust: return kRobust;
        case verifier::Verdict::NotRobust: return kNotRobust;
        case verifier::Verdict::Undecided: return kUndecided;
    }
    return kUndecided;
}

void print_counterexample(const verifier::VerificationOutcome& o, std::ostream& out) {
    if (!o.counterexample) {
        return;
    }
    const auto& c = *o.counterexample;
    std::vector<io::TransformationRecord> records;
    for (std::size_t t = 0; t < c.instantiations.size(); ++t) {
        records.push_back({c.kinds[t], c.instantiations[t].values});
    }
    out << "instantiation: " << io::format_instantiation(records) << "\n";
    out << "adversarial label: " << c.adversarial_label << "\n";
    out << "replay: " << (c.replay_confirmed ? (c.tie_only ? "confirmed (logit tie)" : "confirmed") : "failed")
        << "\n";
}

std::vector<std::string> json_files(const std::string& dir) {
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) {
        throw IoError(dir + ": " + ec.message());
    }
    std::vector<std::string> files;
    for (const auto& entry : it) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

int cmd_verify(const Inputs& in, const std::string& outcome_path, const std::string& cex_path, std::ostream& out) {
    std::string base;
    const io::QueryDocument doc = in.document(base);
    const auto query = materialize(doc, base);
    const auto config = doc.solver.apply({});
    auto backend = in.backend();
    const auto o = verifier::verify(query, config, backend.get());
    out << verdict_line(o) << "\n";
    out << "label: " << o.label << "\n";
    print_counterexample(o, out);
    if (o.counterexample && !cex_path.empty()) {
        io::save_image(o.counterexample->image, cex_path, format_for(cex_path, false));
        out << "counterexample: " << cex_path << "\n";
    }
    if (!outcome_path.empty()) {
        const std::string name = in.query.empty() ? "query" : fs::path(in.query).stem().string();
        io::write_file(outcome_path, io::serialize_outcome(verifier::to_document(name, o)));
    }
    char t[64];
    std::snprintf(t, sizeof t, "time: %.3f s (%zu nodes)", o.seconds, o.stats.nodes);
    out << t << "\n";
    return exit_for(o);
}

int cmd_falsify(const Inputs& in, int grid, std::size_t samples, std::uint64_t seed, std::ostream& out) {
    std::string base;
    const io::QueryDocument doc = in.document(base);
    const auto query = materialize(doc, base);
    const bool random = samples > 0 || query.perturbation_radius > 0.0;
    const auto o = random ? verifier::falsify_random(query, samples ? samples : 1000, seed)
                          : verifier::falsify_bruteforce(query, grid);
    std::string line = verdict_line(o);
    if (o.verdict == verifier::Verdict::Robust && !o.exhaustive) {
        line += random ? " (on samples)" : " (on grid)";
    }
    out << line << "\n";
    out << "label: " << o.label << "\n";
    print_counterexample(o, out);
    out << "evaluations: " << o.evaluations << "\n";
    return exit_for(o);
}

int cmd_transform(const std::string& image, std::size_t index, const std::string& out_path, bool ascii,
                  const std::string& translate, int subsample, int zoom, const std::string& photometric,
                  std::ostream& out) {
    const int chosen = !translate.empty() + (subsample > 0) + (zoom > 0) + !photometric.empty();
    if (chosen != 1) {
        throw CLI::ValidationError("transform", "give exactly one of --translate, --subsample, --zoom, --photometric");
    }
    const Image im = io::load_image(image, index);
    Image result;
    if (!translate.empty()) {
        const auto v = parse_list(translate, 2);
        result = apply_translation(im, as_int(v[0], "--translate"), as_int(v[1], "--translate"));
    } else if (subsample > 0) {
        result = apply_subsample(im, subsample);
    } else if (zoom > 0) {
        result = apply_zoom(im, zoom);
    } else {
        const auto v = parse_list(photometric, 2);
        result = apply_photometric(im, v[0], v[1]);
    }
    io::save_image(result, out_path, format_for(out_path, ascii));
    out << "wrote " << out_path << "\n";
    return 0;
}

int cmd_encode(const Inputs& in, const std::string& out_path, std::ostream& out) {
    std::string base;
    const io::QueryDocument doc = in.document(base);
    const auto enc = encoder::encode_query(materialize(doc, base));
    io::write_file(out_path, milp::export_lp(enc.model));
    out << "wrote " << out_path << " (" << enc.model.variable_count() << " variables, " << enc.model.constraints().size()
        << " constraints)\n";
    return 0;
}

int cmd_batch(const std::string& dir, const std::string& report, std::size_t jobs, std::optional<double> timeout,
              const std::string& outcomes, std::ostream& out, std::ostream& err) {
    const auto files = json_files(dir);
    std::vector<verifier::BatchQuery> queries;
    std::vector<std::optional<verifier::BatchItem>> failed(files.size());
    std::vector<std::size_t> slot;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = fs::path(files[i]).stem().string();
        try {
            io::QueryDocument doc = io::load_query(files[i]);
            if (timeout) {
                doc.solver.timeout_seconds = *timeout;
            }
            verifier::BatchQuery q;
            q.name = name;
            q.query = materialize(doc, fs::path(files[i]).parent_path().string());
            q.domain = doc.domain.empty() ? describe_domain(q.query.transformations, q.query.perturbation_radius)
                                          : doc.domain;
            q.config = doc.solver.apply({});
            queries.push_back(std::move(q));
            slot.push_back(i);
        } catch (const std::exception& e) {
            err << files[i] << ": " << e.what() << "\n";
            verifier::BatchItem item;
            item.name = name;
            item.domain = "invalid";
            item.outcome.reason = verifier::UndecidedReason::Error;
            item.outcome.detail = e.what();
            failed[i] = std::move(item);
        }
    }
    auto done = verifier::batch_verify(queries, jobs);
    std::vector<verifier::BatchItem> items(files.size());
    for (std::size_t k = 0; k < done.size(); ++k) {
        items[slot[k]] = std::move(done[k]);
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (failed[i]) {
            items[i] = std::move(*failed[i]);
        }
    }
    if (!outcomes.empty()) {
        fs::create_directories(outcomes);
        for (const auto& it : items) {
            io::write_file((fs::path(outcomes) / (it.name + ".json")).string(),
                           io::serialize_outcome(verifier::to_document(it.name, it.outcome)));
        }
    }
    for (const auto& it : items) {
        out << it.name << "\t" << verdict_line(it.outcome) << "\n";
    }
    const std::string table = verifier::format_report(verifier::summarize(items));
    io::write_file(report, table);
    out << table;
    return 0;
}

int cmd_augment(const std::string& dir, const std::string& out_dir, std::ostream& out) {
    std::vector<verifier::ExportItem> items;
    for (const auto& f : json_files(dir)) {
        const auto doc = io::parse_outcome(io::read_file(f));
        items.push_back({doc.label, verifier::from_document(doc)});
    }
    const std::size_t n = verifier::export_adversarial_set(items, out_dir);
    out << "exported " << n << " counterexamples to " << out_dir << "\n";
    return 0;
}

}  // namespace

std::vector<double> parse_list(const std::string& text, std::size_t expected) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v)) {
            throw ParseError("'" + text + "': expected " + std::to_string(expected) + " comma-separated numbers");
        }
        values.push_back(v);
        pos = comma + 1;
    }
    if (values.size() != expected) {
        throw ParseError("'" + text + "': expected " + std::to_string(expected) + " comma-separated numbers");
    }
    return values;
}

std::string describe_domain(const std::vector<TransformationSpec>& specs, double rho) {
    std::string s;
    for (const auto& spec : specs) {
        if (!s.empty()) {
            s += "+";
        }
        s += to_string(spec.kind);
        switch (spec.kind) {
            case TransformKind::Photometric:
                s += "[" + number(spec.contrast.lo) + "," + number(spec.contrast.hi) + "]x[" +
                     number(spec.luminosity.lo) + "," + number(spec.luminosity.hi) + "]";
                break;
            case TransformKind::Translation: {
                if (spec.shifts.empty()) {
                    s += "{}";
                    break;
                }
                int a = spec.shifts[0].first, b = a, c = spec.shifts[0].second, d = c;
                for (auto [x, y] : spec.shifts) {
                    a = std::min(a, x);
                    b = std::max(b, x);
                    c = std::min(c, y);
                    d = std::max(d, y);
                }
                s += "[" + std::to_string(a) + "," + std::to_string(b) + "]x[" + std::to_string(c) + "," +
                     std::to_string(d) + "]";
                if (TransformationSpec::translation_box(a, b, c, d).shifts != spec.shifts) {
                    s += "~" + std::to_string(spec.shifts.size());
                }
                break;
            }
            case TransformKind::Subsample:
            case TransformKind::Zoom:
                s += factor_set(spec.factors);
                break;
            case TransformKind::Perturbation:
                s += number(spec.radius);
                break;
        }
    }
    if (rho > 0.0) {
        s += (s.empty() ? "rho" : "+rho") + number(rho);
    }
    return s.empty() ? "identity" : s;
}

verifier::VerificationQuery materialize(const io::QueryDocument& doc, const std::string& base_dir) {
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() || base_dir.empty() ? path.string() : (fs::path(base_dir) / path).string();
    };
    verifier::VerificationQuery q;
    q.network = io::load_network(resolve(doc.network_path));
    Image im = io::load_image(resolve(doc.image_path), doc.image_index);
    if (doc.normalize) {
        Tensor3 t = im.data();
        for (double& v : t.values()) {
            v /= im.p_max();
        }
        im = Image(std::move(t), 1.0);
    }
    q.image = std::move(im);
    q.transformations = doc.transformations;
    q.perturbation_radius = doc.rho;
    q.label = doc.label ? *doc.label : forward(q.network, q.image).label;
    encoder::validate_query(q);
    return q;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local transformational robustness verifier for CNNs", "ltr"};
    app.require_subcommand(1);

    Inputs verify_in;
    std::string outcome_path, cex_path;
    auto* verify = app.add_subcommand("verify", "decide robustness with the MILP encoding");
    verify_in.attach(verify, true);
    verify->add_option("--outcome", outcome_path, "write the outcome document (JSON)");
    verify->add_option("--counterexample", cex_path, "write the counterexample image");

    Inputs falsify_in;
    int grid = 21;
    std::size_t samples = 0;
    std::uint64_t seed = 1;
    auto* falsify = app.add_subcommand("falsify", "search instantiations concretely");
    falsify_in.attach(falsify, false);
    falsify->add_option("--grid", grid, "photometric grid points per axis")->check(CLI::PositiveNumber);
    falsify->add_option("--samples", samples, "random instantiations instead of enumeration");
    falsify->add_option("--seed", seed, "random seed");

    std::string t_image, t_out, t_translate, t_photometric;
    std::size_t t_index = 0;
    int t_subsample = 0, t_zoom = 0;
    bool t_ascii = false;
    auto* transform = app.add_subcommand("transform", "apply one concrete transformation to an image");
    transform->add_option("--image", t_image)->required();
    transform->add_option("--index", t_index);
    transform->add_option("--out", t_out)->required();
    transform->add_option("--translate", t_translate, "tx,ty");
    transform->add_option("--subsample", t_subsample, "factor");
    transform->add_option("--zoom", t_zoom, "factor");
    transform->add_option("--photometric", t_photometric, "mu,nu");
    transform->add_flag("--ascii", t_ascii, "write plain (P2) PGM");

    Inputs encode_in;
    std::string e_out;
    auto* encode = app.add_subcommand("encode", "write the query's MILP in LP format");
    encode_in.attach(encode, false);
    encode->add_option("--out", e_out)->required();

    std::string b_dir, b_report, b_outcomes;
    std::size_t jobs = 1;
    std::optional<double> b_timeout;
    auto* batch = app.add_subcommand("batch", "verify every query in a directory");
    batch->add_option("--queries", b_dir)->required();
    batch->add_option("--report", b_report)->required();
    batch->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
    batch->add_option("--timeout", b_timeout);
    batch->add_option("--outcomes", b_outcomes, "write one outcome document per query");

    std::string a_dir, a_out;
    auto* augment = app.add_subcommand("augment", "export counterexamples as a dataset");
    augment->add_option("--outcomes", a_dir)->required();
    augment->add_option("--out", a_out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (*verify) {
            return cmd_verify(verify_in, outcome_path, cex_path, out);
        }
        if (*falsify) {
            return cmd_falsify(falsify_in, grid, samples, seed, out);
        }
        if (*transform) {
            return cmd_transform(t_image, t_index, t_out, t_ascii, t_translate, t_subsample, t_zoom, t_photometric,
                                 out);
        }
        if (*encode) {
            return cmd_encode(encode_in, e_out, out);
        }
        if (*batch) {
            return cmd_batch(b_dir, b_report, jobs, b_timeout, b_outcomes, out, err);
        }
        return cmd_augment(a_dir, a_out, out);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kIo;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const DimensionError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const ModelError& e) {
        err << "invalid model: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternal;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace ltr::cli
