// command-line driver for the toric code decoding toolkit; talks to the
// shared library exclusively through the public C interface
#include <toric3d/toric3d.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

[[noreturn]] void die(const std::string& context) {
    std::fprintf(stderr, "toric3d: %s: %s\n", context.c_str(), tc3d_last_error());
    std::exit(1);
}

void check(tc3d_status st, const std::string& context) {
    if (st != TC3D_OK) die(context);
}

struct CodeDeleter {
    void operator()(tc3d_code* c) const { tc3d_code_free(c); }
};
struct DecoderDeleter {
    void operator()(tc3d_decoder* d) const { tc3d_decoder_free(d); }
};
using CodePtr = std::unique_ptr<tc3d_code, CodeDeleter>;
using DecoderPtr = std::unique_ptr<tc3d_decoder, DecoderDeleter>;

CodePtr make_code(int L, int dim) {
    tc3d_code* c = nullptr;
    check(tc3d_code_new(L, dim, &c), "building code");
    return CodePtr(c);
}

// common decoder selection shared by eval/threshold/bench
struct DecoderChoice {
    std::string kind = "truncated";  // constant | mld | truncated | neural
    double model_rate = 0.01;        // assumed rate of the likelihood oracles
    int w_max = 4;
    std::string checkpoint;
};

DecoderPtr make_decoder(const DecoderChoice& sel, const tc3d_code* code) {
    tc3d_decoder* d = nullptr;
    if (sel.kind == "constant") {
        check(tc3d_decoder_new_constant(code, &d), "constant decoder");
    } else if (sel.kind == "mld") {
        check(tc3d_decoder_new_mld(code, sel.model_rate, &d), "exhaustive mld decoder");
    } else if (sel.kind == "truncated") {
        check(tc3d_decoder_new_mld_truncated(code, sel.model_rate, sel.w_max, &d),
              "truncated mld decoder");
    } else if (sel.kind == "neural") {
        if (sel.checkpoint.empty()) {
            std::fprintf(stderr, "toric3d: --decoder neural requires --checkpoint\n");
            std::exit(1);
        }
        check(tc3d_decoder_new_neural(code, sel.checkpoint.c_str(), &d), "neural decoder");
    } else {
        std::fprintf(stderr, "toric3d: unknown decoder '%s'\n", sel.kind.c_str());
        std::exit(1);
    }
    return DecoderPtr(d);
}

void add_decoder_flags(CLI::App* cmd, DecoderChoice& sel) {
    cmd->add_option("--decoder", sel.kind, "constant, mld, truncated or neural")
        ->check(CLI::IsMember({"constant", "mld", "truncated", "neural"}))
        ->capture_default_str();
    cmd->add_option("--train-error-rate", sel.model_rate,
                    "error rate the decoder models (oracles: table rate)")
        ->capture_default_str();
    cmd->add_option("--w-max", sel.w_max, "enumeration weight cap of the truncated oracle")
        ->capture_default_str();
    cmd->add_option("--checkpoint", sel.checkpoint, "trained network to load");
}

// ---- plot: self-contained CSV -> SVG polyline renderer ----

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "toric3d: cannot open %s\n", path.c_str());
        std::exit(1);
    }
    Table t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::stringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    if (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        t.header = split(line);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        t.rows.push_back(split(line));
    }
    return t;
}

std::size_t column_of(const Table& t, const std::string& name) {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) {
        std::fprintf(stderr, "toric3d: no column '%s' in CSV (have:", name.c_str());
        for (const auto& h : t.header) std::fprintf(stderr, " %s", h.c_str());
        std::fprintf(stderr, ")\n");
        std::exit(1);
    }
    return static_cast<std::size_t>(it - t.header.begin());
}

// round the raw span to a 1/2/5 ladder step
double nice_step(double span, int target_ticks) {
    double raw = span / std::max(target_ticks, 1);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double step = frac <= 1 ? 1 : frac <= 2 ? 2 : frac <= 5 ? 5 : 10;
    return step * mag;
}

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int run_plot(const std::string& in_path, const std::string& x_col, const std::string& y_col,
             const std::string& series_col, const std::string& title,
             const std::string& out_path) {
    Table t = read_csv(in_path);
    std::size_t xi = column_of(t, x_col);
    std::size_t yi = column_of(t, y_col);
    bool grouped = !series_col.empty();
    std::size_t si = grouped ? column_of(t, series_col) : 0;

    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& row : t.rows) {
        if (xi >= row.size() || yi >= row.size()) continue;
        try {
            double x = std::stod(row[xi]);
            double y = std::stod(row[yi]);
            series[grouped ? row[si] : std::string()].emplace_back(x, y);
        } catch (const std::exception&) {
            // non-numeric row (e.g. repeated header); skip
        }
    }
    if (series.empty() || series.begin()->second.empty()) {
        std::fprintf(stderr, "toric3d: no numeric data for %s vs %s in %s\n", y_col.c_str(),
                     x_col.c_str(), in_path.c_str());
        return 1;
    }

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto& [name, pts] : series) {
        std::sort(pts.begin(), pts.end());
        for (auto [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) { xmax += 1; xmin -= 1; }
    if (ymax == ymin) { ymax += 1; ymin -= 1; }
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double W = 720, H = 480, ML = 72, MR = 24, MT = title.empty() ? 24 : 44, MB = 56;
    auto sx = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto sy = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ofstream out(out_path);
    if (!out) {
        std::fprintf(stderr, "toric3d: cannot write %s\n", out_path.c_str());
        return 1;
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    if (!title.empty())
        out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << title << "</text>\n";

    // gridlines and tick labels
    double xstep = nice_step(xmax - xmin, 6);
    double ystep = nice_step(ymax - ymin, 6);
    out << "<g stroke=\"#ddd\" stroke-width=\"1\">\n";
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-12 * xstep; x += xstep)
        out << "<line x1=\"" << sx(x) << "\" y1=\"" << MT << "\" x2=\"" << sx(x) << "\" y2=\""
            << H - MB << "\"/>\n";
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-12 * ystep; y += ystep)
        out << "<line x1=\"" << ML << "\" y1=\"" << sy(y) << "\" x2=\"" << W - MR << "\" y2=\""
            << sy(y) << "\"/>\n";
    out << "</g>\n";
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-12 * xstep; x += xstep)
        out << "<text x=\"" << sx(x) << "\" y=\"" << H - MB + 18
            << "\" text-anchor=\"middle\">" << fmt_num(x) << "</text>\n";
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-12 * ystep; y += ystep)
        out << "<text x=\"" << ML - 8 << "\" y=\"" << sy(y) + 4
            << "\" text-anchor=\"end\">" << fmt_num(y) << "</text>\n";

    out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR
        << "\" height=\"" << H - MT - MB
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 14
        << "\" text-anchor=\"middle\">" << x_col << "</text>\n";
    out << "<text x=\"18\" y=\"" << (MT + H - MB) / 2 << "\" text-anchor=\"middle\" transform=\""
        << "rotate(-90 18 " << (MT + H - MB) / 2 << ")\">" << y_col << "</text>\n";

    int idx = 0;
    for (const auto& [name, pts] : series) {
        const char* color = palette[idx % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (auto [x, y] : pts) out << fmt_num(sx(x)) << "," << fmt_num(sy(y)) << " ";
        out << "\"/>\n";
        for (auto [x, y] : pts)
            out << "<circle cx=\"" << fmt_num(sx(x)) << "\" cy=\"" << fmt_num(sy(y))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        if (grouped) {
            double lx = W - MR - 130, ly = MT + 16 + 18 * idx;
            out << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24
                << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
                << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\">" << series_col << " = "
                << name << "</text>\n";
        }
        ++idx;
    }
    out << "</g>\n</svg>\n";
    std::printf("wrote %s (%zu series, %zu rows)\n", out_path.c_str(), series.size(),
                t.rows.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toric code decoding toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML file; sections name subcommands")->configurable(false);

    // build
    int b_L = 3, b_dim = 3;
    std::string b_out;
    auto* build = app.add_subcommand("build", "construct a code, validate it, optionally save");
    build->configurable();
    build->add_option("--lattice", b_L, "linear lattice size")->capture_default_str();
    build->add_option("--dim", b_dim, "2 or 3")->capture_default_str();
    build->add_option("--out", b_out, "write the parity-check description here");

    // sample
    int s_L = 3, s_dim = 3;
    double s_p = 0.01;
    std::uint64_t s_n = 1000, s_seed = 0;
    std::string s_out = "dataset.csv";
    auto* sample = app.add_subcommand("sample", "dump a sampled syndrome dataset as CSV");
    sample->configurable();
    sample->add_option("--lattice", s_L, "linear lattice size")->capture_default_str();
    sample->add_option("--dim", s_dim, "2 or 3")->capture_default_str();
    sample->add_option("--error-rate", s_p, "depolarizing rate")->capture_default_str();
    sample->add_option("--samples", s_n, "number of draws")->capture_default_str();
    sample->add_option("--seed", s_seed, "stream seed")->capture_default_str();
    sample->add_option("--out", s_out, "CSV path")->capture_default_str();

    // train
    tc3d_train_config tcfg;
    tc3d_train_config_init(&tcfg);
    std::string t_head = "gapt", t_out = "decoder.nqd", t_loss_csv;
    std::vector<int> t_channels;
    auto* train = app.add_subcommand("train", "train a neural decoder");
    train->configurable();
    train->add_option("--lattice", tcfg.L, "linear lattice size")->capture_default_str();
    train->add_option("--dim", tcfg.dim, "2 or 3")->capture_default_str();
    train->add_option("--train-error-rate", tcfg.p_train, "depolarizing rate of the training stream")
        ->capture_default_str();
    train->add_option("--seed", tcfg.seed, "training seed")->capture_default_str();
    train->add_option("--samples", tcfg.total_samples, "total training samples")
        ->capture_default_str();
    train->add_option("--batch", tcfg.batch, "samples per step")->capture_default_str();
    train->add_option("--max-lr", tcfg.max_lr, "one-cycle peak learning rate")
        ->capture_default_str();
    train->add_option("--weight-decay", tcfg.weight_decay, "decoupled weight decay")
        ->capture_default_str();
    train->add_option("--head", t_head, "pooling head: gap or gapt")
        ->check(CLI::IsMember({"gap", "gapt"}))
        ->capture_default_str();
    train->add_option("--stages", tcfg.stages, "residual stages")->capture_default_str();
    train->add_option("--kernel", tcfg.kernel, "conv kernel size (odd)")->capture_default_str();
    train->add_option("--channels", t_channels, "per-stage channel widths (max 8)")
        ->expected(1, 8);
    train->add_option("--out", t_out, "checkpoint path")->capture_default_str();
    train->add_option("--loss-csv", t_loss_csv, "loss trace CSV path");
    std::string t_surface_csv;
    train->add_option("--surface-csv", t_surface_csv,
                      "append an L,p_train,seed,trainability row here (grid accumulator)");

    // eval
    int e_L = 3, e_dim = 3;
    std::vector<double> e_ps;
    std::uint64_t e_n = 10000, e_seed = 0;
    std::string e_out = "metrics.csv";
    bool e_no_time = false;
    DecoderChoice e_sel;
    auto* eval = app.add_subcommand("eval", "evaluate a decoder, write metrics CSV");
    eval->configurable();
    eval->add_option("--lattice", e_L, "linear lattice size")->capture_default_str();
    eval->add_option("--dim", e_dim, "2 or 3")->capture_default_str();
    eval->add_option("--error-rate", e_ps, "evaluation rates (repeatable)")->required();
    eval->add_option("--samples", e_n, "samples per rate")->capture_default_str();
    eval->add_option("--seed", e_seed, "evaluation seed")->capture_default_str();
    add_decoder_flags(eval, e_sel);
    eval->add_flag("--no-time", e_no_time, "omit the wall-time column (reproducible bytes)");
    eval->add_option("--out", e_out, "metrics CSV path")->capture_default_str();

    // threshold
    std::vector<int> th_Ls;
    std::vector<double> th_ps;
    int th_dim = 3;
    std::uint64_t th_n = 10000, th_seed = 0;
    std::string th_out;
    DecoderChoice th_sel;
    auto* threshold =
        app.add_subcommand("threshold", "locate the accuracy crossing of a decoder family");
    threshold->configurable();
    threshold->add_option("--lattice", th_Ls, "lattice sizes, ascending (repeatable)")
        ->required()
        ->expected(2, 16);
    threshold->add_option("--dim", th_dim, "2 or 3")->capture_default_str();
    threshold->add_option("--error-rate", th_ps, "sorted sweep grid (repeatable)")->required();
    threshold->add_option("--samples", th_n, "samples per grid point")->capture_default_str();
    threshold->add_option("--seed", th_seed, "evaluation seed")->capture_default_str();
    add_decoder_flags(threshold, th_sel);
    threshold->add_option("--out", th_out, "also write the swept metrics CSV here");

    // bench
    int r_L = 5, r_dim = 3;
    double r_p = 0.01;
    std::uint64_t r_n = 2000, r_seed = 0;
    std::string r_out;
    DecoderChoice r_sel;
    auto* bench = app.add_subcommand("bench", "time batched and unbatched decoding");
    bench->configurable();
    bench->add_option("--lattice", r_L, "linear lattice size")->capture_default_str();
    bench->add_option("--dim", r_dim, "2 or 3")->capture_default_str();
    bench->add_option("--error-rate", r_p, "syndrome sampling rate")->capture_default_str();
    bench->add_option("--samples", r_n, "syndromes to decode")->capture_default_str();
    bench->add_option("--seed", r_seed, "sampling seed")->capture_default_str();
    add_decoder_flags(bench, r_sel);
    bench->add_option("--out", r_out, "also write the two timing rows as CSV");

    // plot
    std::string p_in, p_x = "p", p_y = "accuracy", p_series, p_title, p_out = "plot.svg";
    auto* plot = app.add_subcommand("plot", "render a metrics CSV as an SVG line plot");
    plot->configurable();
    plot->add_option("--in", p_in, "input CSV")->required();
    plot->add_option("--x", p_x, "x column name")->capture_default_str();
    plot->add_option("--y", p_y, "y column name")->capture_default_str();
    plot->add_option("--series", p_series, "group rows into one line per value of this column");
    plot->add_option("--title", p_title, "plot title");
    plot->add_option("--out", p_out, "SVG path")->capture_default_str();

    // lets "toric3d eval --config f.toml" reach the app-level --config option
    for (auto* sc : app.get_subcommands(nullptr)) sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (build->parsed()) {
        CodePtr code = make_code(b_L, b_dim);
        std::printf("lattice %d, %dD: %zu qubits, %zu syndrome bits, %zu logical classes\n",
                    tc3d_code_lattice(code.get()), tc3d_code_dim(code.get()),
                    tc3d_code_n_qubits(code.get()), tc3d_code_syndrome_bits(code.get()),
                    tc3d_code_n_classes(code.get()));
        if (tc3d_code_validate(code.get()) != TC3D_OK) {
            std::fprintf(stderr, "validation FAILED:\n%s\n", tc3d_last_error());
            return 1;
        }
        std::printf("validation passed\n");
        if (!b_out.empty()) {
            check(tc3d_code_save(code.get(), b_out.c_str()), "saving code");
            std::printf("wrote %s\n", b_out.c_str());
        }
        return 0;
    }

    if (sample->parsed()) {
        CodePtr code = make_code(s_L, s_dim);
        check(tc3d_dataset_dump(code.get(), s_p, s_n, s_seed, 1, s_out.c_str()),
              "dumping dataset");
        std::printf("wrote %s (%llu samples)\n", s_out.c_str(),
                    static_cast<unsigned long long>(s_n));
        return 0;
    }

    if (train->parsed()) {
        tcfg.head_gapt = (t_head == "gapt") ? 1 : 0;
        tcfg.n_channels = static_cast<int>(t_channels.size());
        for (std::size_t i = 0; i < t_channels.size() && i < 8; ++i)
            tcfg.channels[i] = t_channels[i];
        double trainability = 0.0;
        check(tc3d_train(&tcfg, t_out.c_str(),
                         t_loss_csv.empty() ? nullptr : t_loss_csv.c_str(), &trainability),
              "training");
        std::printf("checkpoint %s  trainability %.4f\n", t_out.c_str(), trainability);
        if (!t_loss_csv.empty()) std::printf("loss trace %s\n", t_loss_csv.c_str());
        if (!t_surface_csv.empty()) {
            bool fresh = !std::ifstream(t_surface_csv).good();
            std::ofstream out(t_surface_csv, std::ios::app);
            if (!out) {
                std::fprintf(stderr, "toric3d: cannot write %s\n", t_surface_csv.c_str());
                return 1;
            }
            if (fresh) out << "L,p_train,seed,trainability\n";
            char row[128];
            std::snprintf(row, sizeof row, "%d,%.9g,%llu,%.9g\n", tcfg.L, tcfg.p_train,
                          static_cast<unsigned long long>(tcfg.seed), trainability);
            out << row;
        }
        return 0;
    }

    if (eval->parsed()) {
        CodePtr code = make_code(e_L, e_dim);
        DecoderPtr d = make_decoder(e_sel, code.get());
        check(tc3d_eval_csv(d.get(), code.get(), e_ps.data(), e_ps.size(), e_n, e_seed,
                            e_no_time ? 0 : 1, e_out.c_str()),
              "evaluating");
        // echo a human summary alongside the CSV
        for (double p : e_ps) {
            double acc = 0, loss = 0, per = 0;
            check(tc3d_eval(d.get(), code.get(), p, e_n, e_seed, &acc, &loss, &per),
                  "evaluating");
            std::printf("%s  L=%d  p=%.4g  accuracy %.4f  loss %.4f\n",
                        tc3d_decoder_name(d.get()), e_L, p, acc, loss);
        }
        std::printf("wrote %s\n", e_out.c_str());
        return 0;
    }

    if (threshold->parsed()) {
        std::vector<CodePtr> codes;
        std::vector<DecoderPtr> decs;
        std::vector<const tc3d_code*> code_raw;
        std::vector<tc3d_decoder*> dec_raw;
        for (int L : th_Ls) {
            codes.push_back(make_code(L, th_dim));
            decs.push_back(make_decoder(th_sel, codes.back().get()));
            code_raw.push_back(codes.back().get());
            dec_raw.push_back(decs.back().get());
        }
        int found = 0;
        double p_th = 0, residual = 0;
        check(tc3d_threshold(code_raw.data(), dec_raw.data(), code_raw.size(), th_ps.data(),
                             th_ps.size(), th_n, th_seed, th_out.empty() ? nullptr : th_out.c_str(),
                             &found, &p_th, &residual),
              "threshold sweep");
        if (found)
            std::printf("threshold %.6g (median of pair crossings, residual %.3g)\n", p_th,
                        residual);
        else
            std::printf("no crossing inside the swept grid\n");
        if (!th_out.empty()) std::printf("wrote %s\n", th_out.c_str());
        return 0;
    }

    if (bench->parsed()) {
        CodePtr code = make_code(r_L, r_dim);
        DecoderPtr d = make_decoder(r_sel, code.get());
        double batched = 0, unbatched = 0;
        check(tc3d_bench(d.get(), code.get(), r_p, r_n, r_seed,
                         r_out.empty() ? nullptr : r_out.c_str(), &batched, &unbatched),
              "benchmarking");
        auto rate = [](double per) { return per > 0 ? 1.0 / per : 0.0; };
        std::printf("%s  batched   %.3g s/decode  (%.0f syndromes/s)\n",
                    tc3d_decoder_name(d.get()), batched, rate(batched));
        std::printf("%s  unbatched %.3g s/decode  (%.0f syndromes/s)\n",
                    tc3d_decoder_name(d.get()), unbatched, rate(unbatched));
        if (!r_out.empty()) std::printf("wrote %s\n", r_out.c_str());
        return 0;
    }

    if (plot->parsed()) return run_plot(p_in, p_x, p_y, p_series, p_title, p_out);

    return 0;
}
