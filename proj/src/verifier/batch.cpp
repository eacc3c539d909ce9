#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "ltr/core/errors.hpp"
#include "ltr/verifier/verifier.hpp"

namespace ltr::verifier {

std::vector<BatchItem> batch_verify(const std::vector<BatchQuery>& queries, std::size_t jobs,
                                    milp::SolverBackend* backend) {
    std::vector<BatchItem> items(queries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) {
            const BatchQuery& q = queries[i];
            items[i].name = q.name;
            items[i].domain = q.domain;
            try {
                items[i].outcome = verify(q.query, q.config, backend);
            } catch (const std::exception& e) {
                items[i].outcome.verdict = Verdict::Undecided;
                items[i].outcome.reason = UndecidedReason::Error;
                items[i].outcome.label = q.query.label;
                items[i].outcome.detail = e.what();
            }
        }
    };
    // An external backend shares one work directory; keep it on one thread.
    jobs = backend ? 1 : std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(queries.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return items;
}

std::vector<ReportRow> summarize(const std::vector<BatchItem>& items) {
    std::vector<ReportRow> rows;
    std::vector<double> total;
    for (const BatchItem& it : items) {
        auto row = std::find_if(rows.begin(), rows.end(), [&](const ReportRow& r) { return r.domain == it.domain; });
        if (row == rows.end()) {
            rows.push_back({it.domain, 0, 0.0, 0});
            total.push_back(0.0);
            row = rows.end() - 1;
        }
        const Verdict v = it.outcome.verdict;
        if (v == Verdict::Undecided) {
            continue;
        }
        ++row->verified;
        total[row - rows.begin()] += it.outcome.seconds;
        if (v == Verdict::Robust) {
            ++row->ltr;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].mean_seconds = rows[i].verified ? total[i] / static_cast<double>(rows[i].verified) : 0.0;
    }
    return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
    std::string out = "domain\tverified\tmean_s\tltr\n";
    for (const ReportRow& r : rows) {
        char mean[32];
        std::snprintf(mean, sizeof mean, "%.3f", r.mean_seconds);
        out += r.domain + "\t" + std::to_string(r.verified) + "\t" + mean + "\t" + std::to_string(r.ltr) + "\n";
    }
    return out;
}

std::size_t export_adversarial_set(const std::vector<ExportItem>& items, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) {
        throw IoError(directory + ": " + ec.message());
    }
    std::string manifest;
    std::size_t written = 0;
    for (const ExportItem& item : items) {
        const auto& c = item.outcome.counterexample;
        if (item.outcome.verdict != Verdict::NotRobust || !c) {
            continue;
        }
        char stem[32];
        std::snprintf(stem, sizeof stem, "adv_%04zu", written);
        const std::string json_name = std::string(stem) + ".json";
        io::save_image(c->image, (fs::path(directory) / json_name).string(), io::ImageFormat::Json);
        if (c->image.channels() == 1) {
            io::save_image(c->image, (fs::path(directory) / (std::string(stem) + ".pgm")).string(),
                           io::ImageFormat::PgmBinary);
        }
        std::vector<io::TransformationRecord> records;
        for (std::size_t t = 0; t < c->instantiations.size(); ++t) {
            records.push_back({c->kinds[t], c->instantiations[t].values});
        }
        manifest += json_name + "\t" + std::to_string(item.original_label) + "\t" +
                    std::to_string(c->adversarial_label) + "\t" + io::format_instantiation(records) + "\n";
        ++written;
    }
    io::write_file((fs::path(directory) / "manifest.tsv").string(), manifest);
    return written;
}

}  // namespace ltr::verifier
