#include "lrc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "lrc/theory.hpp"

namespace fs = std::filesystem;

namespace lrc {

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    require(f.good(), "cannot open " + path);
    f << text;
    require(f.good(), "write failed for " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

double best_val(const TrainTrace& tr) {
    double best = 1e300;
    for (const auto& r : tr.records)
        if (r.has_val) best = std::min(best, r.val_loss);
    return best;
}

struct DistillOutcome {
    TrainTrace trace;
    double gap = 0.0;
    double best_val_loss = 0.0;
};

DistillOutcome run_distill(StudentModel& s, const TeacherModel& teacher,
                           const Corpus& corpus, const SgdConfig& sc) {
    DistillOutcome out;
    out.trace = train(s, teacher, corpus, sc);
    auto [train_part, held] = split_corpus(corpus, sc.seq_len + 1);
    out.gap = measure_generalization_gap(s, teacher, train_part, held, sc.seq_len);
    out.best_val_loss = best_val(out.trace);
    return out;
}

nlohmann::json trace_summary(const TrainTrace& tr) {
    nlohmann::json j;
    const LossBreakdown& last = tr.records.back().loss;
    j["final_kd"] = last.kd;
    j["final_lm"] = last.lm;
    j["final_clone"] = last.clone;
    j["final_total"] = last.total;
    j["final_val_loss"] = tr.final_val_loss;
    j["initial_total"] = tr.initial_loss;
    j["best_total"] = tr.best_loss;
    j["resolved_lr"] = tr.resolved_lr;
    j["steps"] = tr.records.size();
    return j;
}

}  // namespace

void cmd_train_teacher(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out);
    Corpus corpus = build_corpus(cfg);
    save_corpus(corpus, cfg.out + "/corpus.lrcd");

    RngState rng(cfg.seed);
    TeacherModel t = init_teacher(model_config(cfg), rng);
    TrainTrace trace = train_teacher(t, corpus, sgd_config(cfg));

    save_teacher(t, cfg.out + "/teacher.ckpt");
    write_trace_csv(trace, cfg.out + "/teacher_trace.csv");
    nlohmann::json summary = trace_summary(trace);
    summary["uniform_baseline"] = std::log(static_cast<double>(cfg.vocab_size));
    summary["corpus_provenance"] = corpus.provenance;
    write_json(cfg.out + "/teacher_summary.json", summary);
    write_text(cfg.out + "/config.resolved", serialize_config(cfg));
    std::printf("teacher: final=%.6f val=%.6f (uniform %.6f)\n",
                trace.records.back().loss.total, trace.final_val_loss,
                std::log(static_cast<double>(cfg.vocab_size)));
}

void cmd_distill(const RunConfig& cfg) {
    cfg.validate();
    require(!cfg.teacher.empty(), "distill: teacher checkpoint required (teacher=PATH)");
    fs::create_directories(cfg.out);
    TeacherModel teacher = load_teacher(cfg.teacher);
    require(teacher.cfg.vocab_size == cfg.vocab_size &&
                teacher.cfg.num_layers == cfg.num_layers &&
                teacher.cfg.hidden_dim == cfg.hidden_dim,
            "distill: teacher checkpoint does not match the model config");

    Corpus corpus = build_corpus(cfg);
    RngState rng(cfg.seed);
    StudentModel s = init_student(teacher, cfg.rank, student_init(cfg), rng);
    DistillOutcome out = run_distill(s, teacher, corpus, sgd_config(cfg));

    save_student(s, cfg.out + "/student.ckpt");
    write_trace_csv(out.trace, cfg.out + "/train_trace.csv");
    nlohmann::json summary = trace_summary(out.trace);
    summary["best_val_loss"] = out.best_val_loss;
    summary["generalization_gap"] = out.gap;
    summary["rank"] = cfg.rank;
    summary["corpus_provenance"] = corpus.provenance;
    write_json(cfg.out + "/distill_summary.json", summary);
    write_text(cfg.out + "/config.resolved", serialize_config(cfg));
    std::printf("distill: rank=%zu final=%.6f best_val=%.6f gap=%+.6f\n", cfg.rank,
                out.trace.records.back().loss.total, out.best_val_loss, out.gap);
}

void cmd_sweep(const RunConfig& cfg, const std::string& axis,
               const std::vector<double>& grid) {
    cfg.validate();
    require(!grid.empty(), "sweep: empty grid");
    require(axis == "rank" || axis == "n_samples" || axis == "lambda" || axis == "lr",
            "sweep: axis must be rank, n_samples, lambda or lr");
    require(!cfg.teacher.empty(), "sweep: teacher checkpoint required (teacher=PATH)");
    fs::create_directories(cfg.out);
    TeacherModel teacher = load_teacher(cfg.teacher);
    Corpus corpus = build_corpus(cfg);

    nlohmann::json out;
    out["axis"] = axis;
    out["grid"] = grid;
    nlohmann::json points = nlohmann::json::array();

    const std::vector<std::size_t> nested_ranks = {2, 4, 8, 16};

    if (axis == "n_samples") {
        std::vector<std::pair<double, double>> law;
        for (double budget_d : grid) {
            std::size_t budget = static_cast<std::size_t>(budget_d);
            require(budget >= cfg.seq_len + 2 && budget <= corpus.ids.size(),
                    "sweep: budget outside the corpus");
            Corpus sub;
            sub.vocab_size = corpus.vocab_size;
            sub.provenance = corpus.provenance + ":prefix" + std::to_string(budget);
            sub.ids.assign(corpus.ids.begin(),
                           corpus.ids.begin() + static_cast<std::ptrdiff_t>(budget));
            nlohmann::json per_rank = nlohmann::json::array();
            double best_loss = 1e300;
            std::size_t best_rank = nested_ranks.front();
            for (std::size_t r : nested_ranks) {
                if (r > cfg.hidden_dim) continue;
                std::vector<double> vals;
                for (std::uint64_t s3 = 0; s3 < 3; ++s3) {
                    RunConfig rc = cfg;
                    rc.rank = r;
                    rc.seed = cfg.seed + s3;
                    RngState rng(rc.seed);
                    StudentModel s = init_student(teacher, r, student_init(rc), rng);
                    DistillOutcome o = run_distill(s, teacher, sub, sgd_config(rc));
                    vals.push_back(o.best_val_loss);
                }
                std::sort(vals.begin(), vals.end());
                double med = vals[vals.size() / 2];
                per_rank.push_back({{"rank", r}, {"median_best_val_loss", med}});
                if (med < best_loss) {
                    best_loss = med;
                    best_rank = r;
                }
            }
            law.push_back({budget_d, static_cast<double>(best_rank)});
            points.push_back({{"value", budget_d},
                              {"best_rank", best_rank},
                              {"best_val_loss", best_loss},
                              {"per_rank", per_rank}});
        }
        if (law.size() >= 4) {
            RankFit fit = fit_rank_law(law);
            out["rank_fit"] = {{"slope", fit.slope},
                               {"intercept", fit.intercept},
                               {"correlation", fit.correlation},
                               {"implied_c1_over_c2", fit.c1 / fit.c2}};
        }
    } else {
        for (double v : grid) {
            RunConfig rc = cfg;
            if (axis == "rank") {
                rc.rank = static_cast<std::size_t>(v);
                require(rc.rank >= 1 && rc.rank <= cfg.hidden_dim,
                        "sweep: rank outside [1, hidden_dim]");
            } else if (axis == "lambda") {
                rc.lambda_clone = v;
            } else {
                require(v > 0.0, "sweep: lr grid values must be positive");
                rc.lr = v;
                rc.lr_auto = false;
            }
            RngState rng(rc.seed);
            StudentModel s = init_student(teacher, rc.rank, student_init(rc), rng);
            DistillOutcome o = run_distill(s, teacher, corpus, sgd_config(rc));
            points.push_back({{"value", v},
                              {"rank", rc.rank},
                              {"best_val_loss", o.best_val_loss},
                              {"final_val_loss", o.trace.final_val_loss},
                              {"final_train_total", o.trace.records.back().loss.total},
                              {"generalization_gap", o.gap}});
        }
    }
    out["points"] = points;
    write_json(cfg.out + "/sweep_" + axis + ".json", out);
    std::printf("sweep %s: %zu points written\n", axis.c_str(), grid.size());
}

namespace {

// Plot-ready CSV columns per artifact kind; kept stable for downstream use.
void report_trace_csv(const std::string& src, const std::string& dst) {
    TrainTrace tr = read_trace_csv(src);
    std::ofstream f(dst);
    require(f.good(), "report: cannot open " + dst);
    f << "step,total,running_mean_grad_sq,val_loss\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& r : tr.records) {
        f << r.step << ',' << num(r.loss.total) << ',' << num(r.running_mean_grad_sq)
          << ',' << (r.has_val ? num(r.val_loss) : "") << '\n';
    }
}

}  // namespace

void cmd_report(const std::string& dir) {
    require(fs::is_directory(dir), "report: not a directory: " + dir);
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) names.insert(entry.path().filename().string());

    nlohmann::json report;
    nlohmann::json artifacts = nlohmann::json::array();
    std::size_t found = 0;

    for (const std::string& name : names) {
        if (name.rfind("report", 0) == 0) continue;  // own outputs
        const std::string path = dir + "/" + name;
        if (name == "train_trace.csv" || name == "teacher_trace.csv") {
            ++found;
            artifacts.push_back({{"file", name}, {"kind", "train_trace"}});
            std::string base = name.substr(0, name.size() - 4);
            report_trace_csv(path, dir + "/report_" + base + ".csv");
        } else if (name.rfind("sweep_", 0) == 0 && name.size() > 5 &&
                   name.substr(name.size() - 5) == ".json") {
            ++found;
            std::ifstream f(path);
            nlohmann::json j = nlohmann::json::parse(f);
            artifacts.push_back({{"file", name}, {"kind", "sweep"}, {"axis", j["axis"]}});
            // rank/lambda/lr sweeps become a value,loss,gap curve; the nested
            // sweep becomes the rank-law table.
            if (j["axis"] == "n_samples") {
                std::ofstream csv(dir + "/report_rank_law.csv");
                csv << "n_tokens,best_rank,best_val_loss\n";
                for (const auto& p : j["points"])
                    csv << p["value"].get<double>() << ','
                        << p["best_rank"].get<std::size_t>() << ','
                        << p["best_val_loss"].get<double>() << '\n';
                if (j.contains("rank_fit")) report["rank_fit"] = j["rank_fit"];
            } else {
                std::string axis = j["axis"].get<std::string>();
                std::ofstream csv(dir + "/report_" + axis + "_curve.csv");
                csv << axis << ",best_val_loss,generalization_gap\n";
                for (const auto& p : j["points"])
                    csv << p["value"].get<double>() << ','
                        << p["best_val_loss"].get<double>() << ','
                        << p["generalization_gap"].get<double>() << '\n';
            }
        } else if (name.rfind("verify_", 0) == 0 && name.size() > 5 &&
                   name.substr(name.size() - 5) == ".json") {
            ++found;
            std::ifstream f(path);
            nlohmann::json j = nlohmann::json::parse(f);
            artifacts.push_back(
                {{"file", name}, {"kind", "verify"}, {"pass", j["pass"]}});
            for (const auto& rep : j["reports"]) {
                std::string rname = rep["name"].get<std::string>();
                std::ofstream csv(dir + "/report_" + rname + ".csv");
                csv << "x,measured,bound\n";
                char buf[64];
                auto num = [&](double x) {
                    std::snprintf(buf, sizeof buf, "%.17g", x);
                    return std::string(buf);
                };
                for (const auto& p : rep["points"])
                    csv << num(p["x"].get<double>()) << ','
                        << num(p["measured"].get<double>()) << ','
                        << num(p["bound"].get<double>()) << '\n';
            }
        } else if (name == "distill_summary.json" || name == "teacher_summary.json") {
            ++found;
            std::ifstream f(path);
            report[name.substr(0, name.size() - 5)] = nlohmann::json::parse(f);
            artifacts.push_back({{"file", name}, {"kind", "summary"}});
        }
    }
    require(found > 0, "report: nothing to report in " + dir);
    report["artifacts"] = artifacts;
    write_json(dir + "/report.json", report);
    std::printf("report: %zu artifacts consolidated\n", found);
}

}  // namespace lrc
