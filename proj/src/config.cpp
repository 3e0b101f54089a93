#include "lrc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrc {

namespace {

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::uint64_t x = std::stoull(v, &pos);
        require(pos == v.size(), "config: bad integer for " + key + ": " + v);
        return x;
    } catch (const std::invalid_argument&) {
        throw InvalidArgument("config: bad integer for " + key + ": " + v);
    } catch (const std::out_of_range&) {
        throw InvalidArgument("config: integer out of range for " + key + ": " + v);
    }
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        require(pos == v.size(), "config: bad number for " + key + ": " + v);
        return x;
    } catch (const std::invalid_argument&) {
        throw InvalidArgument("config: bad number for " + key + ": " + v);
    } catch (const std::out_of_range&) {
        throw InvalidArgument("config: number out of range for " + key + ": " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw InvalidArgument("config: bad boolean for " + key + ": " + v);
}

}  // namespace

void RunConfig::validate() const {
    model_config(*this).validate();
    require(rank >= 1 && rank <= hidden_dim, "config: rank must lie in [1, hidden_dim]");
    require(init == "svd" || init == "random" || init == "identity",
            "config: init must be svd, random or identity");
    require(init != "identity" || rank == hidden_dim,
            "config: identity init requires rank == hidden_dim");
    require(data == "markov" || data == "file", "config: data must be markov or file");
    require(data != "file" || !data_path.empty(),
            "config: data=file requires data_path");
    require(markov_order == 1 || markov_order == 2, "config: markov_order must be 1 or 2");
    require(optimizer == "sgd" || optimizer == "adam",
            "config: optimizer must be sgd or adam");
    require(schedule == "constant" || schedule == "cosine",
            "config: schedule must be constant or cosine");
    require(lr_auto || lr > 0.0, "config: lr must be positive or auto");
    require(steps >= 1, "config: steps must be >= 1");
    require(batch_size >= 1, "config: batch_size must be >= 1");
    require(tau > 0.0, "config: tau must be positive");
    require(corpus_length >= seq_len + 2, "config: corpus_length too small for seq_len");
}

void apply_override(RunConfig& c, const std::string& assignment) {
    auto eq = assignment.find('=');
    require(eq != std::string::npos && eq > 0,
            "config: expected key=value, got: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string v = assignment.substr(eq + 1);

    if (key == "vocab_size") c.vocab_size = parse_u64(key, v);
    else if (key == "num_layers") c.num_layers = parse_u64(key, v);
    else if (key == "hidden_dim") c.hidden_dim = parse_u64(key, v);
    else if (key == "num_heads") c.num_heads = parse_u64(key, v);
    else if (key == "seq_len") c.seq_len = parse_u64(key, v);
    else if (key == "ffn_mult") c.ffn_mult = parse_u64(key, v);
    else if (key == "rank") c.rank = parse_u64(key, v);
    else if (key == "init") c.init = v;
    else if (key == "data") c.data = v;
    else if (key == "data_path") c.data_path = v;
    else if (key == "corpus_length") c.corpus_length = parse_u64(key, v);
    else if (key == "markov_order") c.markov_order = parse_u64(key, v);
    else if (key == "data_seed") c.data_seed = parse_u64(key, v);
    else if (key == "steps") c.steps = parse_u64(key, v);
    else if (key == "batch_size") c.batch_size = parse_u64(key, v);
    else if (key == "lr") {
        if (v == "auto") {
            c.lr_auto = true;
            c.lr = 0.0;
        } else {
            c.lr_auto = false;
            c.lr = parse_f64(key, v);
        }
    } else if (key == "optimizer") c.optimizer = v;
    else if (key == "schedule") c.schedule = v;
    else if (key == "lambda_clone") c.lambda_clone = parse_f64(key, v);
    else if (key == "tau") c.tau = parse_f64(key, v);
    else if (key == "kd") c.kd = parse_bool(key, v);
    else if (key == "lm") c.lm = parse_bool(key, v);
    else if (key == "clone") c.clone = parse_bool(key, v);
    else if (key == "val_every") c.val_every = parse_u64(key, v);
    else if (key == "full_grad_trace") c.full_grad_trace = parse_bool(key, v);
    else if (key == "full_batch") c.full_batch = parse_bool(key, v);
    else if (key == "seed") c.seed = parse_u64(key, v);
    else if (key == "teacher") c.teacher = v;
    else if (key == "out") c.out = v;
    else throw InvalidArgument("config: unknown key: " + key);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        // strip comments and whitespace
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        apply_override(c, line.substr(b, e - b + 1));
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    auto b = [](bool x) { return x ? "on" : "off"; };
    out << "batch_size=" << c.batch_size << '\n';
    out << "clone=" << b(c.clone) << '\n';
    out << "corpus_length=" << c.corpus_length << '\n';
    out << "data=" << c.data << '\n';
    out << "data_path=" << c.data_path << '\n';
    out << "data_seed=" << c.data_seed << '\n';
    out << "ffn_mult=" << c.ffn_mult << '\n';
    out << "full_batch=" << b(c.full_batch) << '\n';
    out << "full_grad_trace=" << b(c.full_grad_trace) << '\n';
    out << "hidden_dim=" << c.hidden_dim << '\n';
    out << "init=" << c.init << '\n';
    out << "kd=" << b(c.kd) << '\n';
    out << "lambda_clone=" << fmt_double(c.lambda_clone) << '\n';
    out << "lm=" << b(c.lm) << '\n';
    out << "lr=" << (c.lr_auto ? std::string("auto") : fmt_double(c.lr)) << '\n';
    out << "markov_order=" << c.markov_order << '\n';
    out << "num_heads=" << c.num_heads << '\n';
    out << "num_layers=" << c.num_layers << '\n';
    out << "optimizer=" << c.optimizer << '\n';
    out << "out=" << c.out << '\n';
    out << "rank=" << c.rank << '\n';
    out << "schedule=" << c.schedule << '\n';
    out << "seed=" << c.seed << '\n';
    out << "seq_len=" << c.seq_len << '\n';
    out << "steps=" << c.steps << '\n';
    out << "tau=" << fmt_double(c.tau) << '\n';
    out << "teacher=" << c.teacher << '\n';
    out << "val_every=" << c.val_every << '\n';
    out << "vocab_size=" << c.vocab_size << '\n';
    return out.str();
}

ModelConfig model_config(const RunConfig& c) {
    ModelConfig m;
    m.vocab_size = c.vocab_size;
    m.num_layers = c.num_layers;
    m.hidden_dim = c.hidden_dim;
    m.num_heads = c.num_heads;
    m.seq_len = c.seq_len;
    m.ffn_mult = c.ffn_mult;
    return m;
}

SgdConfig sgd_config(const RunConfig& c) {
    SgdConfig s;
    s.lr = c.lr;
    s.lr_auto = c.lr_auto;
    s.steps = c.steps;
    s.batch_size = c.batch_size;
    s.seq_len = c.seq_len;
    s.seed = c.seed;
    s.objective.lambda = c.lambda_clone;
    s.objective.tau = c.tau;
    s.objective.use_kd = c.kd;
    s.objective.use_lm = c.lm;
    s.objective.use_clone = c.clone;
    s.optimizer = c.optimizer == "adam" ? OptimKind::Adam : OptimKind::Sgd;
    s.schedule = c.schedule == "cosine" ? LrSchedule::Cosine : LrSchedule::Constant;
    s.val_every = c.val_every;
    s.full_batch = c.full_batch;
    s.full_grad_trace = c.full_grad_trace;
    return s;
}

StudentInit student_init(const RunConfig& c) {
    if (c.init == "identity") return StudentInit::Identity;
    if (c.init == "random") return StudentInit::Random;
    return StudentInit::Svd;
}

Corpus build_corpus(const RunConfig& c) {
    if (c.data == "file") return load_text_file(c.data_path);
    return generate_markov_corpus(c.data_seed, static_cast<int>(c.markov_order),
                                  c.vocab_size, c.corpus_length);
}

}  // namespace lrc
