// orthostat: finite-width statistics of orthogonally initialized tanh MLPs.
// Subcommands solve (layer recursions), expand (deep-layer series), mc
// (ensemble sampling), compare (three-way report), weingarten and moments
// (orthogonal-group moment tables). All outputs are CSV.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orthostat/asymptotics.hpp"
#include "orthostat/csv.hpp"
#include "orthostat/gauss_expect.hpp"
#include "orthostat/montecarlo.hpp"
#include "orthostat/presets.hpp"
#include "orthostat/recursion.hpp"
#include "orthostat/weingarten.hpp"

#ifndef ORTHOSTAT_DATA_DIR
#define ORTHOSTAT_DATA_DIR "data"
#endif

namespace {

using nlohmann::json;
using namespace orthostat;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::string preset = "x0";
    std::string preset_b = "x1";
    std::string tables_path = std::string(ORTHOSTAT_DATA_DIR) + "/expansion_tables.csv";
    int width = 50;
    int depth = 10;
    double c_w = 1.0;
    std::uint64_t seed = 1;
    int n_net = 200;
    int n_stats = 5;
    bool full_paper_scale = false;
    std::string lambda_b = "1/ell";
    std::string lambda_w = "1";
    bool gaussian = false;
};

Schedule parse_schedule(const std::string& text) {
    if (text == "1/ell" || text == "1/l") return Schedule::inverse_depth();
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos == text.size()) return Schedule::constant(v);
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("schedule must be a number or \"1/ell\": " + text);
}

void load_config_file(Options& opt, const CLI::App& cmd) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw CLI::ValidationError("cannot open config file " + opt.config_path);
    json cfg = json::parse(in);

    auto absent = [&](const std::string& flag) { return cmd.count(flag) == 0; };
    if (cfg.contains("n") && absent("--width")) opt.width = cfg["n"].get<int>();
    if (cfg.contains("L") && absent("--depth")) opt.depth = cfg["L"].get<int>();
    if (cfg.contains("c_w") && absent("--cw")) opt.c_w = cfg["c_w"].get<double>();
    if (cfg.contains("seed") && absent("--seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("n_net") && absent("--n-net")) opt.n_net = cfg["n_net"].get<int>();
    if (cfg.contains("n_stats") && absent("--n-stats")) opt.n_stats = cfg["n_stats"].get<int>();
    if (cfg.contains("lambda_b")) {
        opt.lambda_b = cfg["lambda_b"].is_string() ? cfg["lambda_b"].get<std::string>()
                                                   : std::to_string(cfg["lambda_b"].get<double>());
    }
    if (cfg.contains("lambda_w")) {
        opt.lambda_w = cfg["lambda_w"].is_string() ? cfg["lambda_w"].get<std::string>()
                                                   : std::to_string(cfg["lambda_w"].get<double>());
    }
    if (cfg.contains("inputs") && cfg["inputs"].is_array() && !cfg["inputs"].empty() &&
        absent("--preset")) {
        opt.preset = cfg["inputs"][0].get<std::string>();
        if (cfg["inputs"].size() > 1) opt.preset_b = cfg["inputs"][1].get<std::string>();
    }
}

NetworkConfig to_network_config(const Options& opt) {
    NetworkConfig cfg;
    cfg.width = opt.width;
    cfg.depth = opt.depth;
    cfg.c_w = opt.c_w;
    cfg.lambda_b = parse_schedule(opt.lambda_b);
    cfg.lambda_w = parse_schedule(opt.lambda_w);
    cfg.ensemble = opt.gaussian ? WeightEnsemble::gaussian : WeightEnsemble::orthogonal;
    return cfg;
}

McConfig to_mc_config(const Options& opt) {
    McConfig cfg;
    cfg.width = opt.width;
    cfg.depth = opt.depth;
    cfg.c_w = opt.c_w;
    cfg.lambda_b = parse_schedule(opt.lambda_b);
    cfg.lambda_w = parse_schedule(opt.lambda_w);
    cfg.n_net = opt.full_paper_scale ? 600 : opt.n_net;
    cfg.n_stats = opt.full_paper_scale ? 10 : opt.n_stats;
    cfg.seed = opt.seed;
    return cfg;
}

// presets are 50-component vectors; other widths take the leading components
// (tiled cyclically when wider)
std::vector<double> input_for_width(const std::string& preset, int width) {
    const auto& base = preset_input(preset);
    std::vector<double> x(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) x[static_cast<std::size_t>(i)] = base[i % base.size()];
    return x;
}

std::ofstream open_output(const Options& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    const auto path = std::filesystem::path(opt.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

int cmd_solve(const Options& opt) {
    const NetworkConfig cfg = to_network_config(opt);
    const GaussExpect quad;
    const RecursionEngine engine(quad);
    const Trajectory traj = engine.run(input_for_width(opt.preset, opt.width), cfg);
    const auto normalized = RecursionEngine::normalize(traj);

    auto out = open_output(opt, "trajectory.csv");
    out << "ell,K,Theta,V4,D,F,A,B,P,Q,R,S,T,U,V6\n";
    for (const auto& st : traj.states) {
        out << st.ell << ',' << format_double(st.kernel) << ',' << format_double(st.ntk);
        for (const auto& name :
             {"V4", "D", "F", "A", "B", "P", "Q", "R", "S", "T", "U", "V6"})
            out << ',' << format_double(tensor_component(st, name));
        out << '\n';
    }

    auto nrm = open_output(opt, "trajectory_normalized.csv");
    nrm << "ell,K,Theta,V4,D,F,A,B,P,Q,R,S,T,U,V6\n";
    for (const auto& st : normalized) {
        nrm << st.ell << ',' << format_double(st.kernel) << ',' << format_double(st.ntk);
        for (const auto& name :
             {"V4", "D", "F", "A", "B", "P", "Q", "R", "S", "T", "U", "V6"})
            nrm << ',' << format_double(normalized_component(st, name));
        nrm << '\n';
    }
    return 0;
}

int cmd_expand(const Options& opt, const std::string& tensor, int lmax) {
    const auto tables = load_expansion_tables(opt.tables_path);
    const ExpansionTable& table = find_table(tables, tensor);
    auto out = open_output(opt, "expansion.csv");
    out << "ell,value\n";
    for (int ell = 1; ell <= lmax; ++ell)
        out << ell << ',' << format_double(table.eval(ell)) << '\n';
    return 0;
}

void write_mc_rows(std::ofstream& out, const std::string& tensor,
                   const std::vector<EnsembleEstimate>& series, double c_w,
                   std::uint64_t seed) {
    for (std::size_t i = 0; i < series.size(); ++i)
        out << tensor << ',' << (i + 1) << ',' << format_double(series[i].mean) << ','
            << format_double(series[i].stderr) << ',' << series[i].n_samples << ','
            << format_double(c_w) << ',' << seed << '\n';
}

int cmd_mc(const Options& opt, const std::vector<double>& sweep_values) {
    const McConfig cfg = to_mc_config(opt);
    if (!sweep_values.empty()) {
        const auto sweeps =
            sweep_cw(cfg, sweep_values, input_for_width(opt.preset, opt.width), input_for_width(opt.preset_b, opt.width));
        auto out = open_output(opt, "mc_sweep.csv");
        out << "tensor,ell,mean,stderr,n_samples,c_w,seed\n";
        for (const auto& sw : sweeps) {
            write_mc_rows(out, "K11", sw.k11, sw.c_w, cfg.seed);
            write_mc_rows(out, "K12", sw.k12, sw.c_w, cfg.seed);
            write_mc_rows(out, "K22", sw.k22, sw.c_w, cfg.seed);
            write_mc_rows(out, "Theta11", sw.th11, sw.c_w, cfg.seed);
            write_mc_rows(out, "Theta12", sw.th12, sw.c_w, cfg.seed);
            write_mc_rows(out, "Theta22", sw.th22, sw.c_w, cfg.seed);
        }
        return 0;
    }

    const TensorEstimates est = estimate_tensors(cfg, input_for_width(opt.preset, opt.width));
    auto out = open_output(opt, "mc.csv");
    out << "tensor,ell,mean,stderr,n_samples,c_w,seed\n";
    write_mc_rows(out, "K", est.kernel, cfg.c_w, cfg.seed);
    write_mc_rows(out, "Theta", est.ntk, cfg.c_w, cfg.seed);
    write_mc_rows(out, "V4", est.v4, cfg.c_w, cfg.seed);
    write_mc_rows(out, "D", est.d, cfg.c_w, cfg.seed);
    write_mc_rows(out, "F", est.f, cfg.c_w, cfg.seed);
    write_mc_rows(out, "A", est.a, cfg.c_w, cfg.seed);
    write_mc_rows(out, "B", est.b, cfg.c_w, cfg.seed);
    return 0;
}

int cmd_compare(const Options& opt) {
    const NetworkConfig net_cfg = to_network_config(opt);
    const GaussExpect quad;
    const RecursionEngine engine(quad);
    const Trajectory traj = engine.run(input_for_width(opt.preset, opt.width), net_cfg);

    std::vector<ExpansionTable> tables;
    bool have_tables = true;
    try {
        tables = load_expansion_tables(opt.tables_path);
    } catch (const std::exception&) {
        have_tables = false;
    }

    const McConfig mc_cfg = to_mc_config(opt);
    const TensorEstimates est = estimate_tensors(mc_cfg, input_for_width(opt.preset, opt.width));
    auto mc_series = [&](const std::string& name) -> const std::vector<EnsembleEstimate>* {
        if (name == "K") return &est.kernel;
        if (name == "Theta") return &est.ntk;
        if (name == "V4") return &est.v4;
        if (name == "D") return &est.d;
        if (name == "F") return &est.f;
        if (name == "A") return &est.a;
        if (name == "B") return &est.b;
        return nullptr;
    };

    auto out = open_output(opt, "report.csv");
    out << "tensor,ell,recursion,expansion,mc_mean,mc_stderr,z_score,rel_residual,flags\n";
    for (const auto& name : tensor_names()) {
        const ExpansionTable* table = nullptr;
        if (have_tables) {
            for (const auto& t : tables)
                if (t.tensor == name) table = &t;
        }
        const auto* mc = mc_series(name);
        for (const auto& st : traj.states) {
            const double rec = tensor_component(st, name);
            std::string flags;
            out << name << ',' << st.ell << ',' << format_double(rec) << ',';
            double expv = 0.0;
            if (table) {
                expv = table->eval(st.ell);
                out << format_double(expv);
            } else {
                flags += flags.empty() ? "no_expansion" : ";no_expansion";
            }
            out << ',';
            if (mc) {
                const auto& e = (*mc)[static_cast<std::size_t>(st.ell - 1)];
                out << format_double(e.mean) << ',' << format_double(e.stderr) << ',';
                if (e.stderr > 0.0)
                    out << format_double((e.mean - rec) / e.stderr);
                out << ',';
            } else {
                out << ",,,";
                flags += flags.empty() ? "no_mc" : ";no_mc";
            }
            if (table && rec != 0.0) out << format_double(std::abs(rec - expv) / std::abs(rec));
            out << ',' << flags << '\n';
        }
    }
    return 0;
}

int cmd_weingarten(const Options& opt, int k) {
    if (k < 1 || k > 3) throw CLI::ValidationError("weingarten: only k in {1,2,3} is supported");
    auto out = open_output(opt, "weingarten.csv");
    out << "m,lambda,n,exact,series_order5\n";
    for (int m = 1; m <= k; ++m) {
        // distinct coset classes at this m
        std::vector<CycleType> classes;
        if (m == 1) classes = {CycleType({1})};
        if (m == 2) classes = {CycleType({1, 1}), CycleType({2})};
        if (m == 3) classes = {CycleType({1, 1, 1}), CycleType({2, 1}), CycleType({3})};
        for (const auto& lambda : classes) {
            std::string lam_str;
            for (std::size_t i = 0; i < lambda.parts.size(); ++i) {
                if (i) lam_str += "+";
                lam_str += std::to_string(lambda.parts[i]);
            }
            out << m << ',' << lam_str << ',' << opt.width << ',';
            if (m <= 2)
                out << weingarten_exact_k2(opt.width, lambda).str();
            out << ',' << format_double(weingarten_series(opt.width, lambda)) << '\n';
        }
    }
    return 0;
}

std::vector<int> parse_index_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

int cmd_moments(const Options& opt, const std::string& rows_text, const std::string& cols_text) {
    const std::vector<int> rows = parse_index_list(rows_text);
    const std::vector<int> cols = cols_text.empty() ? rows : parse_index_list(cols_text);
    const double value = orthogonal_moment(opt.width, opt.c_w, rows, cols);
    auto out = open_output(opt, "moments.csv");
    out << "n,c_w,rows,cols,value\n";
    out << opt.width << ',' << format_double(opt.c_w) << ',';
    for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? "+" : "") << rows[i];
    out << ',';
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "+" : "") << cols[i];
    out << ',' << format_double(value) << '\n';
    std::cout << format_double(value) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-width statistics of orthogonally initialized tanh networks"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file (flags win over file values)");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--seed", opt.seed, "RNG seed");
    app.add_option("--cw", opt.c_w, "weight variance hyperparameter");
    app.add_option("--depth", opt.depth, "number of layers L");
    app.add_option("--width", opt.width, "hidden width n");
    app.add_option("--preset", opt.preset, "input preset (x0..x3)");
    app.add_option("--preset-b", opt.preset_b, "second input preset for pair sweeps");
    app.add_option("--n-net", opt.n_net, "networks per repetition");
    app.add_option("--n-stats", opt.n_stats, "repetitions for cumulant error bars");
    app.add_option("--tables", opt.tables_path, "expansion coefficient CSV");
    app.add_option("--lambda-b", opt.lambda_b, "bias learning-rate schedule (number or 1/ell)");
    app.add_option("--lambda-w", opt.lambda_w, "weight learning-rate schedule (number or 1/ell)");
    app.add_flag("--full-paper-scale", opt.full_paper_scale, "600 networks, 10 repetitions");
    app.add_flag("--gaussian", opt.gaussian, "iid-Gaussian weight ensemble in the recursions");

    auto* solve = app.add_subcommand("solve", "iterate the layer recursions");
    std::string expand_tensor = "K";
    int expand_lmax = 30;
    auto* expand = app.add_subcommand("expand", "evaluate the deep-layer series");
    expand->add_option("--tensor", expand_tensor, "tensor name (K, Theta, V4, D, ..., V6)");
    expand->add_option("--lmax", expand_lmax, "largest layer");
    std::string sweep_text;
    auto* mc = app.add_subcommand("mc", "sample a network ensemble");
    mc->add_option("--sweep-cw", sweep_text, "comma list of c_w values for a pair-mode sweep");
    auto* compare = app.add_subcommand("compare", "three-way recursion/series/ensemble report");
    int wg_k = 2;
    auto* weingarten = app.add_subcommand("weingarten", "Weingarten value table");
    weingarten->add_option("--n", opt.width, "matrix dimension");
    weingarten->add_option("--k", wg_k, "half the number of matrix entries (1..3)");
    std::string rows_text = "1,1", cols_text;
    auto* moments = app.add_subcommand("moments", "orthogonal matrix-entry moment");
    moments->add_option("--n", opt.width, "matrix dimension");
    moments->add_option("--rows", rows_text, "comma list of row indices");
    moments->add_option("--cols", cols_text, "comma list of column indices (defaults to rows)");
    moments->add_option("--indices", rows_text, "shorthand: row indices, columns equal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        load_config_file(opt, app);
        if (opt.depth < 1 || opt.width < 3) {
            std::cerr << "usage error: depth must be >= 1 and width >= 3\n";
            return 2;
        }
        if (solve->parsed()) return cmd_solve(opt);
        if (expand->parsed()) return cmd_expand(opt, expand_tensor, expand_lmax);
        if (mc->parsed()) {
            std::vector<double> sweep_values;
            if (!sweep_text.empty()) {
                std::stringstream ss(sweep_text);
                std::string item;
                while (std::getline(ss, item, ',')) sweep_values.push_back(std::stod(item));
            }
            return cmd_mc(opt, sweep_values);
        }
        if (compare->parsed()) return cmd_compare(opt);
        if (weingarten->parsed()) return cmd_weingarten(opt, wg_k);
        if (moments->parsed()) return cmd_moments(opt, rows_text, cols_text);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
