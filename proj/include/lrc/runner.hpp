#ifndef LRC_RUNNER_HPP
#define LRC_RUNNER_HPP

#include <string>
#include <vector>

#include "lrc/config.hpp"

namespace lrc {

// Command pipelines behind the CLI. Every pipeline writes its artifacts under
// cfg.out with fixed names and is byte-deterministic given the resolved
// config.

// corpus.lrcd, teacher.ckpt, teacher_trace.csv, teacher_summary.json,
// config.resolved.
void cmd_train_teacher(const RunConfig& cfg);

// student.ckpt, train_trace.csv, distill_summary.json, config.resolved.
// Requires cfg.teacher to point at a teacher checkpoint.
void cmd_distill(const RunConfig& cfg);

// sweep_<axis>.json for axis in {rank, n_samples, lambda, lr}. The grid is
// the axis values; axis=n_samples nests a rank sweep over {2,4,8,16} per
// budget and fits the rank law.
void cmd_sweep(const RunConfig& cfg, const std::string& axis,
               const std::vector<double>& grid);

// Consolidated report.json plus plot-ready report_*.csv files merged from the
// artifacts found in `dir`. Rerunning is byte-idempotent; an empty directory
// is an error.
void cmd_report(const std::string& dir);

}  // namespace lrc

#endif
