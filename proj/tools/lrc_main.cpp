// Command-line front end: train-teacher | distill | sweep | verify | report.
// Exit codes: 0 success / bound pass, 1 bound fail, 2 usage error,
// 3 numerical failure.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lrc/config.hpp"
#include "lrc/runner.hpp"
#include "lrc/verify.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "config file (key=value lines)");
    cmd->add_option("--set", o.sets, "override a config key (key=value), repeatable");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "override the run seed");
}

lrc::RunConfig resolve(const CommonOpts& o) {
    lrc::RunConfig cfg;
    if (!o.config_path.empty()) cfg = lrc::parse_config_file(o.config_path);
    for (const std::string& s : o.sets) lrc::apply_override(cfg, s);
    if (!o.out.empty()) cfg.out = o.out;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-rank clone distillation harness"};
    app.require_subcommand(1);

    CommonOpts train_o, distill_o, sweep_o, verify_o;
    CLI::App* train_cmd = app.add_subcommand("train-teacher", "train the teacher model");
    add_common(train_cmd, train_o);

    CLI::App* distill_cmd = app.add_subcommand("distill", "distill a low-rank student");
    add_common(distill_cmd, distill_o);
    bool no_kd = false, no_lm = false, no_clone = false;
    distill_cmd->add_flag("--no-kd", no_kd, "drop the KD term from the objective");
    distill_cmd->add_flag("--no-lm", no_lm, "drop the LM term from the objective");
    distill_cmd->add_flag("--no-clone", no_clone,
                          "drop the activation cloning term from the objective");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid sweep over one axis");
    add_common(sweep_cmd, sweep_o);
    std::string axis;
    std::vector<double> grid;
    sweep_cmd->add_option("--axis", axis, "rank | n_samples | lambda | lr")->required();
    sweep_cmd->add_option("--grid", grid, "axis values")->required()->delimiter(',');

    CLI::App* verify_cmd = app.add_subcommand("verify", "run a theory check");
    add_common(verify_cmd, verify_o);
    std::string check;
    verify_cmd
        ->add_option("check", check,
                     "gradcheck | lemma1 | convergence | generalization | mi | "
                     "rank-scaling")
        ->required();

    CLI::App* report_cmd = app.add_subcommand("report", "consolidate run artifacts");
    std::string report_dir;
    report_cmd->add_option("dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) {
            lrc::cmd_train_teacher(resolve(train_o));
        } else if (*distill_cmd) {
            lrc::RunConfig cfg = resolve(distill_o);
            if (no_kd) cfg.kd = false;
            if (no_lm) cfg.lm = false;
            if (no_clone) cfg.clone = false;
            lrc::cmd_distill(cfg);
        } else if (*sweep_cmd) {
            lrc::cmd_sweep(resolve(sweep_o), axis, grid);
        } else if (*verify_cmd) {
            return lrc::run_verify(check, resolve(verify_o));
        } else if (*report_cmd) {
            lrc::cmd_report(report_dir);
        }
    } catch (const lrc::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const lrc::NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s (residual %g)\n", e.what(),
                     e.residual);
        return 3;
    }
    return 0;
}
