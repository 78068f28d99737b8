#pragma once

// Config files, decoder construction by name, CSV/manifest output and the
// verb dispatcher used by the command-line tool.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decrob/bp.hpp"
#include "decrob/concentration.hpp"
#include "decrob/harness.hpp"
#include "decrob/ml_oracle.hpp"
#include "decrob/mlp.hpp"
#include "decrob/registry.hpp"
#include "decrob/sc.hpp"

namespace decrob {

// ---------------------------------------------------------------------------
// Key-value config
//
//   # comment
//   code = ldpc_49_24
//   snr_db = 4, 5, 6          (or [4, 5, 6])
//   smoothing.nu = 0.1

class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "config") {
        Config c;
        std::istringstream in(text);
        std::string line;
        for (int lineno = 1; std::getline(in, line); ++lineno) {
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find_first_of("=:");
            if (eq == std::string::npos)
                throw ParseError(static_cast<std::size_t>(lineno), origin + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            if (!valid_key(key)) throw ParseError(static_cast<std::size_t>(lineno), origin + ": bad key '" + key + "'");
            if (c.values_.count(key))
                throw ParseError(static_cast<std::size_t>(lineno), origin + ": duplicate key '" + key + "'");
            c.values_[key] = trim(line.substr(eq + 1));
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open config " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    /// Command-line overrides replace file values.
    void set(const std::string& key, const std::string& value) {
        if (!valid_key(key)) throw InputError("bad key '" + key + "'");
        values_[key] = value;
    }

    /// "key=value"
    void set_assignment(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("override '" + kv + "' is not key=value");
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, std::string>& entries() const { return values_; }

    std::string get(const std::string& key, const std::string& def) const {
        used_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    std::string require(const std::string& key) const {
        used_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end() || it->second.empty()) throw InputError("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double def) const {
        return has(key) ? to_double(key, get(key, "")) : (used_.insert(key), def);
    }

    std::uint64_t get_uint(const std::string& key, std::uint64_t def) const {
        if (!has(key)) {
            used_.insert(key);
            return def;
        }
        const std::string v = get(key, "");
        const double d = to_double(key, v);
        if (d < 0 || d != std::floor(d) || d > 1.8e19) throw InputError("config: " + key + " must be a non-negative integer");
        return static_cast<std::uint64_t>(d);
    }

    bool get_bool(const std::string& key, bool def) const {
        if (!has(key)) {
            used_.insert(key);
            return def;
        }
        const std::string v = get(key, "");
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw InputError("config: " + key + " must be a boolean");
    }

    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& def = {}) const {
        if (!has(key)) {
            used_.insert(key);
            return def;
        }
        std::string v = get(key, "");
        if (!v.empty() && v.front() == '[') {
            if (v.back() != ']') throw InputError("config: unterminated list for " + key);
            v = v.substr(1, v.size() - 2);
        }
        std::vector<std::string> out;
        std::stringstream ss(v);
        for (std::string item; std::getline(ss, item, ',');) {
            item = trim(item);
            if (item.empty()) throw InputError("config: empty list element in " + key);
            out.push_back(item);
        }
        return out;
    }

    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def = {}) const {
        if (!has(key)) {
            used_.insert(key);
            return def;
        }
        std::vector<double> out;
        for (const auto& s : get_list(key)) out.push_back(to_double(key, s));
        return out;
    }

    /// Keys present in the config that no accessor asked for.
    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static bool valid_key(const std::string& k) {
        if (k.empty()) return false;
        return std::ranges::all_of(k, [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '-';
        });
    }

    static double to_double(const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        double d = 0;
        try {
            d = std::stod(v, &pos);
        } catch (const std::exception&) {
            throw InputError("config: " + key + " = '" + v + "' is not a number");
        }
        if (pos != v.size()) throw InputError("config: " + key + " = '" + v + "' is not a number");
        return d;
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string code;
    std::vector<std::string> decoders{"sp"};
    std::vector<std::string> sources;  // transfer only; defaults to decoders
    std::vector<double> snr_db;
    std::vector<double> alpha{0.01};
    std::vector<AttackKind> attacks{AttackKind::none};
    std::uint64_t frames = 100000;
    std::uint64_t target_errors = 100;
    std::uint64_t seed = 1;
    std::string output = "results.csv";
    std::string manifest;
    std::string artifact_dir;
    std::string checkpoint;
    BpConfig bp;
    AttackPlan plan;
    // train
    TrainConfig train;
    std::size_t hidden_width = 128;
    std::size_t hidden_layers = 2;
    Activation activation = Activation::softplus;
    // bounds
    double bound_c = 1.0;
    double bound_l = 1.0;
    double bound_delta = 1.0;
    std::vector<double> bound_n{1000};
    std::vector<double> bound_eta{0.05};
    std::size_t bound_dim = 10;
    std::size_t repetitions = 0;
    std::vector<double> bound_lambda;
    double bound_loss_mean = 0.3;

    Config source_config;

    static ExperimentConfig from(const Config& c, const std::string& verb) {
        ExperimentConfig e;
        e.source_config = c;
        const bool needs_code = verb != "bounds";
        e.code = needs_code ? c.require("code") : c.get("code", "");
        e.decoders = c.get_list("decoders", e.decoders);
        e.sources = c.get_list("sources", e.decoders);
        e.snr_db = c.get_doubles("snr_db");
        e.alpha = c.get_doubles("alpha", e.alpha);
        e.attacks.clear();
        for (const auto& a : c.get_list("attacks", {"none"})) e.attacks.push_back(parse_attack(a));
        e.frames = c.get_uint("frames", e.frames);
        e.target_errors = c.get_uint("target_errors", e.target_errors);
        e.seed = c.get_uint("seed", e.seed);
        e.output = c.get("output", e.output);
        e.manifest = c.get("manifest", e.output + ".manifest.json");
        e.artifact_dir = c.get("artifact_dir", std::filesystem::path(e.output).parent_path().string());
        e.checkpoint = c.get("checkpoint", "");

        e.bp.max_iterations = c.get_uint("bp.iterations", e.bp.max_iterations);
        e.bp.min_sum_scale = c.get_double("bp.min_sum_scale", e.bp.min_sum_scale);

        auto& s = e.plan.smoothing;
        s.nu = c.get_double("smoothing.nu", s.nu);
        s.samples = c.get_uint("smoothing.samples", s.samples);
        s.estimator = parse_estimator(c.get("smoothing.estimator", to_string(s.estimator)));
        s.loss_clip = c.get_double("smoothing.clip", s.loss_clip);
        s.antithetic = c.get_bool("smoothing.antithetic", s.antithetic);
        s.seed = e.seed;
        auto& p = e.plan.pgd;
        p.iterations = c.get_uint("pgd.iterations", p.iterations);
        p.step_scale = c.get_double("pgd.step_scale", p.step_scale);
        p.random_start = c.get_bool("pgd.random_start", p.random_start);
        p.start_radius = c.get_double("pgd.start_radius", p.start_radius);
        p.radius_uniform = c.get_bool("pgd.radius_uniform", p.radius_uniform);
        p.common_samples = c.get_bool("pgd.common_samples", p.common_samples);
        p.normalized_step = c.get_bool("pgd.normalized_step", p.normalized_step);
        auto& u = e.plan.universal;
        u.train_frames = c.get_uint("uap.train_frames", u.train_frames);
        u.grad.batches = c.get_uint("uap.batches", u.grad.batches);
        u.grad.learning_rate = c.get_double("uap.lr", u.grad.learning_rate);
        u.grad.epochs = c.get_uint("uap.epochs", u.grad.epochs);
        u.grad.normalized_step = c.get_bool("uap.normalized_step", u.grad.normalized_step);

        auto& t = e.train;
        t.steps = c.get_uint("train.steps", t.steps);
        t.learning_rate = c.get_double("train.lr", t.learning_rate);
        t.final_learning_rate_fraction = c.get_double("train.final_lr_fraction", t.final_learning_rate_fraction);
        t.batch_size = c.get_uint("train.batch", t.batch_size);
        t.snr_low_db = c.get_double("train.snr_low", t.snr_low_db);
        t.snr_high_db = c.get_double("train.snr_high", t.snr_high_db);
        const std::string opt = c.get("train.optimizer", "adam");
        if (opt != "adam" && opt != "sgd") throw InputError("config: train.optimizer must be adam or sgd");
        t.optimizer = opt == "sgd" ? Optimizer::sgd : Optimizer::adam;
        t.seed = e.seed;
        e.hidden_width = c.get_uint("train.hidden", e.hidden_width);
        e.hidden_layers = c.get_uint("train.layers", e.hidden_layers);
        e.activation = parse_activation(c.get("train.activation", to_string(e.activation)));

        e.bound_c = c.get_double("bounds.C", e.bound_c);
        e.bound_l = c.get_double("bounds.L", e.bound_l);
        e.bound_delta = c.get_double("bounds.delta", e.bound_delta);
        e.bound_n = c.get_doubles("bounds.N", e.bound_n);
        e.bound_eta = c.get_doubles("bounds.eta", e.bound_eta);
        e.bound_dim = c.get_uint("bounds.n", e.bound_dim);
        e.repetitions = c.get_uint("bounds.repetitions", e.repetitions);
        e.bound_lambda = c.get_doubles("bounds.lambda", {});
        e.bound_loss_mean = c.get_double("bounds.loss_mean", e.bound_loss_mean);

        if (const auto extra = c.unused(); !extra.empty()) throw InputError("config: unknown key '" + extra.front() + "'");
        e.validate(verb);
        return e;
    }

    void validate(const std::string& verb) const {
        const bool fer_verb = verb == "simulate" || verb == "attack" || verb == "transfer" || verb == "ablate";
        if (fer_verb) {
            if (snr_db.empty()) throw InputError("config: snr_db grid is empty");
            if (decoders.empty()) throw InputError("config: decoder list is empty");
            if (frames == 0) throw InputError("config: frames must be positive");
        }
        if ((verb == "attack" || verb == "transfer" || verb == "ablate") && (alpha.empty() || attacks.empty()))
            throw InputError("config: alpha and attack grids must be nonempty");
        for (double a : alpha)
            if (!(a >= 0)) throw InputError("config: alpha must be non-negative");
        plan.smoothing.validate();
        if (verb == "train" && checkpoint.empty()) throw InputError("config: train needs 'checkpoint'");
    }
};

// ---------------------------------------------------------------------------

inline DecoderHandle make_decoder(const std::string& name, std::shared_ptr<const LinearCode> code,
                                  const ExperimentConfig& e) {
    if (name == "sp" || name == "sum_product") return make_sum_product(code, e.bp);
    if (name == "ms" || name == "min_sum") return make_min_sum(code, e.bp);
    if (name == "sc") return make_sc(code);
    if (name == "ml" || name == "ml_oracle") return make_ml_oracle(code);
    if (name == "mlp") {
        if (e.checkpoint.empty()) throw InputError("decoder mlp needs 'checkpoint'");
        return make_mlp_decoder(code, load_checkpoint_for(e.checkpoint, *code));
    }
    throw InputError("unknown decoder '" + name + "' (sp, ms, sc, ml, mlp)");
}

struct CsvRow {
    std::string code, decoder, attack, source_decoder;
    double snr_db = 0, alpha = 0;
    FERStats stats;
    std::uint64_t seed = 0;
};

inline const char* kCsvHeader =
    "code,decoder,attack,source_decoder,snr_db,alpha,frames,frame_errors,fer,fer_inverse,ci_low,ci_high,seed";

inline std::string csv_line(const CsvRow& r) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << r.code << ',' << r.decoder << ',' << r.attack << ',' << r.source_decoder << ',' << r.snr_db << ',' << r.alpha
       << ',' << r.stats.frames << ',' << r.stats.frame_errors << ',' << r.stats.fer << ',' << r.stats.fer_inverse_text()
       << ',' << r.stats.wilson_95.low << ',' << r.stats.wilson_95.high << ',' << r.seed;
    return os.str();
}

/// Appends rows and flushes after each so partial results survive failures.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& header) : path_(path) {
        if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
            std::filesystem::create_directories(dir);
        out_.open(path, std::ios::trunc);
        if (!out_) throw InputError("cannot write " + path);
        out_ << header << '\n';
        out_.flush();
    }
    void line(const std::string& s) {
        out_ << s << '\n';
        out_.flush();
        ++rows_;
    }
    void fail(const std::string& what) {
        out_ << "# FAILED: " << what << '\n';
        out_.flush();
    }
    std::size_t rows() const { return rows_; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t rows_ = 0;
};

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

namespace experiment_detail {

inline std::string artifact_path(const ExperimentConfig& e, const AttackArtifact& a, double snr_db) {
    std::ostringstream os;
    os << a.code_id << '_' << a.source_decoder << '_' << to_string(a.kind) << "_snr" << snr_db << "_a" << a.budget.alpha
       << ".attack";
    return (std::filesystem::path(e.artifact_dir.empty() ? "." : e.artifact_dir) / os.str()).string();
}

struct Context {
    const ExperimentConfig& e;
    std::shared_ptr<const LinearCode> code;
    CsvWriter* csv = nullptr;
    nlohmann::json* manifest = nullptr;
    std::ostream& log;

    std::map<std::string, DecoderHandle> cache;
    const Decoder& decoder(const std::string& name) {
        auto& d = cache[name];
        if (!d) d = make_decoder(name, code, e);
        return *d;
    }

    void row(const std::string& dec, AttackKind kind, const std::string& src, double db, double alpha, const FERStats& s) {
        csv->line(csv_line({code->id(), dec, to_string(kind), src, db, alpha, s, e.seed}));
        log << code->id() << ' ' << dec << ' ' << to_string(kind) << " src=" << src << " snr=" << db << " alpha=" << alpha
            << " fer=" << s.fer << " 1/fer=" << s.fer_inverse_text() << " (" << s.frame_errors << '/' << s.frames << ")\n";
    }

    AttackSetup setup(AttackKind kind, double alpha, const Decoder* src, const SnrContext& snr, double db) {
        AttackArtifact art;
        auto s = make_setup(kind, alpha, src, *code, snr, e.plan, e.seed, &art);
        if (is_universal(kind) && alpha > 0) {
            const auto path = artifact_path(e, art, db);
            art.save(path);
            (*manifest)["artifacts"].push_back(path);
        }
        return s;
    }
};

inline void run_simulate(Context& ctx) {
    const auto& e = ctx.e;
    for (const auto& name : e.decoders) {
        const auto& dec = ctx.decoder(name);
        for (double db : e.snr_db) {
            const auto snr = SnrContext::from_ebno(db, ctx.code->rate());
            ctx.row(dec.name(), AttackKind::none, "-", db, 0.0,
                    estimate_fer(dec, *ctx.code, snr, {}, {e.frames, e.target_errors}, e.seed));
        }
    }
}

inline void run_attack(Context& ctx) {
    const auto& e = ctx.e;
    for (const auto& name : e.decoders) {
        const auto& dec = ctx.decoder(name);
        for (double db : e.snr_db) {
            const auto snr = SnrContext::from_ebno(db, ctx.code->rate());
            for (double a : e.alpha)
                for (AttackKind kind : e.attacks) {
                    const auto s = ctx.setup(kind, a, &dec, snr, db);
                    ctx.row(dec.name(), kind, s.source_name(dec), db, a,
                            estimate_fer(dec, *ctx.code, snr, s, {e.frames, e.target_errors}, e.seed));
                }
        }
    }
}

inline void run_transfer(Context& ctx) {
    const auto& e = ctx.e;
    std::vector<const Decoder*> targets;
    for (const auto& n : e.decoders) targets.push_back(&ctx.decoder(n));
    for (double db : e.snr_db) {
        const auto snr = SnrContext::from_ebno(db, ctx.code->rate());
        for (const auto& sn : e.sources) {
            const auto& src = ctx.decoder(sn);
            for (double a : e.alpha)
                for (AttackKind kind : e.attacks) {
                    const auto s = ctx.setup(kind, a, &src, snr, db);
                    const auto run = simulate_paired(*ctx.code, snr, targets, s, StopRule::fixed(e.frames), e.seed);
                    for (std::size_t t = 0; t < targets.size(); ++t)
                        ctx.row(targets[t]->name(), kind, src.name(), db, a, run.stats[t]);
                }
        }
    }
}

inline void run_ablate(Context& ctx, const std::string& diagnostics_path) {
    const auto& e = ctx.e;
    std::ofstream diag(diagnostics_path, std::ios::trunc);
    if (!diag) throw InputError("cannot write " + diagnostics_path);
    diag << "decoder,check,attack,snr_db,alpha_low,alpha_high,value_low,value_high,p_value,flag\n";
    for (const auto& name : e.decoders) {
        const auto& dec = ctx.decoder(name);
        const auto table = ablation_alpha_sweep(dec, *ctx.code, e.snr_db, e.alpha, e.attacks, e.frames, e.plan, e.seed);
        for (const auto& r : table.rows)
            ctx.row(dec.name(), r.attack, r.attack == AttackKind::none || r.attack == AttackKind::random ? "-" : dec.name(),
                    r.snr_db, r.alpha, r.stats);
        for (const auto& m : table.monotonicity)
            diag << dec.name() << ",monotone," << to_string(m.attack) << ',' << m.snr_db << ',' << m.alpha_low << ','
                 << m.alpha_high << ',' << m.fer_low << ',' << m.fer_high << ',' << m.p_decrease << ','
                 << (m.violation ? "violation" : "ok") << '\n';
        for (const auto& g : table.random_gap)
            diag << dec.name() << ",gap_vs_random," << to_string(g.attack) << ',' << g.snr_db << ',' << g.alpha << ','
                 << g.alpha << ',' << 0 << ',' << g.gap << ',' << g.p_greater << ','
                 << (g.p_greater < 0.01 ? "significant" : "n.s.") << '\n';
    }
    (*ctx.manifest)["diagnostics"] = diagnostics_path;
}

inline void run_bounds(const ExperimentConfig& e, const std::string& path, std::ostream& log) {
    CsvWriter csv(path,
                  "C,L,Delta,N,eta,n,bound_objective,bound_sigma_op,bound_sin_angle,repetitions,"
                  "violation_objective,violation_sigma,violation_angle");
    for (double n : e.bound_n)
        for (double eta : e.bound_eta) {
            std::ostringstream os;
            os << std::setprecision(10);
            if (e.repetitions == 0) {
                const auto r = concentration_report(e.bound_c, e.bound_l, e.bound_delta, n, eta, e.bound_dim);
                os << r.C << ',' << r.L << ',' << r.Delta << ',' << r.N << ',' << r.eta << ',' << r.n << ','
                   << r.bound_objective << ',' << r.bound_sigma_op << ',' << r.bound_sin_angle << ",0,,,";
            } else {
                SyntheticSpec spec;
                if (!e.bound_lambda.empty()) spec.lambda = e.bound_lambda;
                spec.loss_bound = e.bound_c;
                spec.loss_mean = e.bound_loss_mean;
                spec.samples = static_cast<std::size_t>(n);
                spec.eta = eta;
                const auto v = validate_concentration(spec, e.repetitions, e.seed);
                const auto& r = v.bounds;
                os << r.C << ',' << r.L << ',' << r.Delta << ',' << r.N << ',' << r.eta << ',' << r.n << ','
                   << r.bound_objective << ',' << r.bound_sigma_op << ',' << r.bound_sin_angle << ',' << v.repetitions
                   << ',' << v.rate_objective() << ',' << v.rate_sigma() << ',' << v.rate_angle();
            }
            csv.line(os.str());
            log << os.str() << '\n';
        }
}

inline void run_train(Context& ctx) {
    const auto& e = ctx.e;
    auto model = MlpModel::create(*ctx.code, e.hidden_width, e.hidden_layers, e.seed, e.activation);
    const auto result = train(model, *ctx.code, e.train);
    model.save(e.checkpoint);
    for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
        ctx.csv->line(std::to_string(i) + ',' + format_double(result.loss_curve[i]));
    (*ctx.manifest)["checkpoint"] = e.checkpoint;
    (*ctx.manifest)["parameters"] = model.parameter_count();
    ctx.log << "trained " << model.parameter_count() << " parameters, final loss "
            << (result.loss_curve.empty() ? 0.0 : result.loss_curve.back()) << " -> " << e.checkpoint << '\n';
}

}  // namespace experiment_detail

inline const std::vector<std::string>& experiment_verbs() {
    static const std::vector<std::string> v{"simulate", "attack", "transfer", "ablate", "bounds", "train"};
    return v;
}

/// Runs one verb. Returns 0 on success; on failure keeps partial output,
/// appends a failure marker and returns 1.
inline int run_experiment(const std::string& verb, const ExperimentConfig& e, std::ostream& log = std::cerr) {
    using namespace experiment_detail;
    if (std::ranges::find(experiment_verbs(), verb) == experiment_verbs().end()) throw InputError("unknown verb " + verb);
    nlohmann::json manifest;
    manifest["verb"] = verb;
    manifest["status"] = "running";
    manifest["config"] = e.source_config.entries();
    manifest["seed"] = e.seed;
    manifest["output"] = e.output;
    manifest["artifacts"] = nlohmann::json::array();

    std::unique_ptr<CsvWriter> csv;
    try {
        if (verb == "bounds") {
            write_json(e.manifest, manifest);
            run_bounds(e, e.output, log);
        } else {
            const auto code = make_code(e.code);
            manifest["code"] = {{"id", code->id()}, {"n", code->n()}, {"k", code->k()}, {"fingerprint", hex64(code->fingerprint())}};
            write_json(e.manifest, manifest);
            csv = std::make_unique<CsvWriter>(e.output, verb == "train" ? "step,loss" : kCsvHeader);
            Context ctx{e, code, csv.get(), &manifest, log, {}};
            if (verb == "simulate") run_simulate(ctx);
            else if (verb == "attack") run_attack(ctx);
            else if (verb == "transfer") run_transfer(ctx);
            else if (verb == "ablate") {
                const auto p = std::filesystem::path(e.output);
                run_ablate(ctx, (p.parent_path() / (p.stem().string() + "_diagnostics.csv")).string());
            } else if (verb == "train") run_train(ctx);
            for (const auto& [name, dec] : ctx.cache) manifest["decoders"][name] = dec->name();
            if (ctx.cache.count("mlp")) manifest["mlp_checkpoint"] = e.checkpoint;
            manifest["rows"] = csv->rows();
        }
        manifest["status"] = "ok";
        write_json(e.manifest, manifest);
        return 0;
    } catch (const std::exception& ex) {
        log << "error: " << ex.what() << '\n';
        if (csv) csv->fail(ex.what());
        manifest["status"] = "failed";
        manifest["error"] = ex.what();
        try {
            write_json(e.manifest, manifest);
        } catch (const std::exception&) {
        }
        return 1;
    }
}

}  // namespace decrob
