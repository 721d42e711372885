#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "voltopo/cubical_ph.hpp"
#include "voltopo/cylinder.hpp"
#include "voltopo/errors.hpp"
#include "voltopo/io_util.hpp"
#include "voltopo/metrics.hpp"
#include "voltopo/phantom.hpp"
#include "voltopo/refine.hpp"
#include "voltopo/topo_loss.hpp"
#include "voltopo/volume_io.hpp"

namespace voltopo::cli {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(what + ": '" + s + "' is not a number");
}

std::size_t parse_count(const std::string& s, const std::string& what) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw InvalidArgument(what + ": '" + s + "' is not a non-negative integer");
    }
    return std::stoull(s);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& p : split(text, ',')) out.push_back(parse_double(p, what));
    return out;
}

std::array<std::string, 3> triple(const std::string& text, const std::string& what) {
    const auto parts = split(text, ',');
    if (parts.size() != 3) throw InvalidArgument(what + " needs three comma-separated values");
    return {parts[0], parts[1], parts[2]};
}

BettiTarget parse_target(const std::string& text) {
    const auto t = triple(text, "--target");
    return {{parse_count(t[0], "--target"), parse_count(t[1], "--target"), parse_count(t[2], "--target")}};
}

Dims parse_dims(const std::string& text) {
    const auto t = triple(text, "--dims");
    return {parse_count(t[0], "--dims"), parse_count(t[1], "--dims"), parse_count(t[2], "--dims")};
}

Spacing parse_spacing(const std::string& text) {
    const auto t = triple(text, "--spacing");
    return {parse_double(t[0], "--spacing"), parse_double(t[1], "--spacing"), parse_double(t[2], "--spacing")};
}

std::string join3(auto a, auto b, auto c) {
    std::ostringstream os;
    os << a << ',' << b << ',' << c;
    return os.str();
}

std::string target_text(const BettiTarget& t) { return join3(t.betti[0], t.betti[1], t.betti[2]); }
std::string betti_text(const Betti& b) { return join3(b[0], b[1], b[2]); }

// CSV text goes to a file when given, otherwise to stdout.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

void check_threads(unsigned threads) {
    if (threads == 0) throw InvalidArgument("--threads must be >= 1");
}

Path3D load_path(const std::string& file) { return path_from_json(read_file(file)); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Topology-aware refinement of tubular segmentations on voxel volumes", "voltopo"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    unsigned threads = PhOptions{}.threads;
    auto threads_option = [&threads](CLI::App* sub) {
        sub->add_option("--threads", threads, "Upper bound on worker threads")->capture_default_str();
    };

    // phantom
    PhantomSpec spec;
    std::string kind = to_string(spec.kind);
    std::string phantom_dir;
    std::string dims_text = join3(spec.dims.nx, spec.dims.ny, spec.dims.nz);
    std::string spacing_text = join3(spec.spacing.sx, spec.spacing.sy, spec.spacing.sz);
    auto* phantom = app.add_subcommand("phantom", "Generate a synthetic phantom (intensity, gt, path, prob)");
    phantom->add_option("--kind", kind, "straight_tube|helix|closed_ring|two_tube_bridged|coil_touching")
        ->capture_default_str();
    phantom->add_option("--out-dir", phantom_dir, "Output directory")->required();
    phantom->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
    phantom->add_option("--radius-mm", spec.tube_radius_mm, "Tube radius in mm")->capture_default_str();
    phantom->add_option("--noise", spec.noise_sigma, "Noise standard deviation of prob")->capture_default_str();
    phantom->add_option("--dims", dims_text, "nx,ny,nz")->capture_default_str();
    phantom->add_option("--spacing", spacing_text, "sx,sy,sz in mm")->capture_default_str();
    phantom->add_option("--islands", spec.islands, "False-positive blobs in prob (touching kinds)")
        ->capture_default_str();
    phantom->add_option("--contact-confidence", spec.contact_confidence,
                        "Cap on prob where the tube touches itself")
        ->capture_default_str();

    // barcode
    std::string in, out_path;
    auto* barcode = app.add_subcommand("barcode", "Persistence barcode of a volume as CSV");
    barcode->add_option("--in", in, "Input svol")->required();
    barcode->add_option("--out", out_path, "Output CSV (stdout if omitted)");
    threads_option(barcode);

    // betti
    double p = 0.5;
    auto* betti = app.add_subcommand("betti", "Betti numbers b0,b1,b2 of the superlevel set at p");
    betti->add_option("--in", in, "Input svol")->required();
    betti->add_option("--p", p, "Threshold")->capture_default_str();
    threads_option(betti);

    // betti-curve
    std::size_t samples = 101;
    auto* curve = app.add_subcommand("betti-curve", "Betti numbers on evenly spaced thresholds in [0, 1]");
    curve->add_option("--in", in, "Input svol")->required();
    curve->add_option("--out", out_path, "Output CSV (stdout if omitted)");
    curve->add_option("--samples", samples, "Number of thresholds")->capture_default_str();
    threads_option(curve);

    // loss
    std::string target = target_text(BettiTarget{});
    TopoLossOptions loss_options;
    auto* loss = app.add_subcommand("loss", "Topological loss of a volume against a Betti target");
    loss->add_option("--in", in, "Input svol")->required();
    loss->add_option("--target", target, "Desired b0,b1,b2")->capture_default_str();
    loss->add_option("--persistence-floor", loss_options.persistence_floor, "Ignore shorter bars")
        ->capture_default_str();
    threads_option(loss);

    // refine
    RefineConfig cfg;
    std::string trace_path;
    auto* refine_cmd = app.add_subcommand("refine", "Topology-constrained refinement of a probability volume");
    refine_cmd->add_option("--in", in, "Input probability svol")->required();
    refine_cmd->add_option("--out", out_path, "Refined svol")->required();
    refine_cmd->add_option("--trace", trace_path, "Per-iteration CSV");
    refine_cmd->add_option("--lambda", cfg.lambda, "Weight of the topological term")->capture_default_str();
    refine_cmd->add_option("--steps", cfg.steps, "Gradient steps")->capture_default_str();
    refine_cmd->add_option("--step-size", cfg.step_size, "Fixed step on the logits")->capture_default_str();
    refine_cmd->add_option("--ph-downsample", cfg.ph_downsample, "Mean-pooling factor before PH")
        ->capture_default_str();
    refine_cmd->add_option("--target", target, "Desired b0,b1,b2")->capture_default_str();
    refine_cmd->add_option("--clamp-eps", cfg.clamp_eps, "Input clamp before the logit")->capture_default_str();
    refine_cmd->add_option("--persistence-floor", cfg.loss.persistence_floor, "Ignore shorter bars")
        ->capture_default_str();
    threads_option(refine_cmd);

    // cylinder
    std::string path_file, ref_file;
    double radius = 0.0;
    std::string cyl_dims, cyl_spacing = spacing_text;
    auto* cylinder = app.add_subcommand("cylinder", "Rasterize the tube around a path (inner cylinder by default)");
    cylinder->add_option("--path", path_file, "Path JSON")->required();
    cylinder->add_option("--out", out_path, "Output mask svol")->required();
    auto* ref_opt = cylinder->add_option("--ref", ref_file, "Take dims and spacing from this svol");
    auto* dims_opt = cylinder->add_option("--dims", cyl_dims, "nx,ny,nz");
    cylinder->add_option("--spacing", cyl_spacing, "sx,sy,sz in mm (with --dims)")->capture_default_str();
    cylinder->add_option("--radius-mm", radius, "Tube radius [default: 1.5 x min spacing]");
    ref_opt->excludes(dims_opt);

    // grow
    GrowConfig grow_cfg;
    std::string intensity_file;
    auto* grow = app.add_subcommand("grow", "Grow a path by a margin and keep voxels in an intensity window");
    grow->add_option("--path", path_file, "Path JSON")->required();
    grow->add_option("--intensity", intensity_file, "Intensity svol")->required();
    grow->add_option("--out", out_path, "Output mask svol")->required();
    grow->add_option("--margin-mm", grow_cfg.margin_mm, "Growth margin")->capture_default_str();
    grow->add_option("--hu-lo", grow_cfg.lo, "Lower intensity bound")->capture_default_str();
    grow->add_option("--hu-hi", grow_cfg.hi, "Upper intensity bound")->capture_default_str();

    // metrics
    std::string pred_file, case_name = "case";
    auto* metrics = app.add_subcommand("metrics", "Dice, HD, HD95 and ASD between two masks");
    metrics->add_option("--pred", pred_file, "Prediction svol")->required();
    metrics->add_option("--ref", ref_file, "Reference svol")->required();
    metrics->add_option("--p", p, "Threshold for scalar inputs")->capture_default_str();
    metrics->add_option("--case", case_name, "Case label")->capture_default_str();
    metrics->add_option("--out", out_path, "Output CSV (stdout if omitted)");

    // ttest
    std::string xs, ys;
    auto* ttest = app.add_subcommand("ttest", "Two-sided paired t-test");
    ttest->add_option("--x", xs, "Comma-separated sample")->required();
    ttest->add_option("--y", ys, "Comma-separated sample")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "voltopo: " << e.what() << '\n';
        return 1;
    }

    try {
        check_threads(threads);
        const PhOptions ph{threads};
        if (phantom->parsed()) {
            spec.kind = phantom_kind_from_string(kind);
            spec.dims = parse_dims(dims_text);
            spec.spacing = parse_spacing(spacing_text);
            const Phantom ph_out = generate_phantom(spec);
            const fs::path dir(phantom_dir);
            fs::create_directories(dir);
            write_volume(ph_out.intensity, dir / "intensity.svol");
            write_volume(ph_out.gt, dir / "gt.svol");
            write_volume(ph_out.prob, dir / "prob.svol");
            write_file_atomic(dir / "path.json", path_to_json(ph_out.path) + "\n");
        } else if (barcode->parsed()) {
            emit(out_path, barcode_to_csv(compute_barcode(read_scalar_volume(in), ph)), out);
        } else if (betti->parsed()) {
            out << betti_text(betti_numbers(compute_barcode(read_scalar_volume(in), ph), p)) << '\n';
        } else if (curve->parsed()) {
            if (samples < 2) throw InvalidArgument("--samples must be >= 2");
            const Barcode bc = compute_barcode(read_scalar_volume(in), ph);
            std::string text = "p,b0,b1,b2\n";
            for (std::size_t i = 0; i < samples; ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
                text += format_double(t) + ',' + betti_text(betti_numbers(bc, t)) + '\n';
            }
            emit(out_path, text, out);
        } else if (loss->parsed()) {
            const BettiTarget t = parse_target(target);
            if (!(loss_options.persistence_floor >= 0.0)) throw InvalidArgument("--persistence-floor must be >= 0");
            const LossValue v = topo_loss(compute_barcode(read_scalar_volume(in), ph), t, loss_options);
            out << "total,dim0,dim1,dim2\n"
                << format_double(v.total) << ',' << format_double(v.per_dim[0]) << ','
                << format_double(v.per_dim[1]) << ',' << format_double(v.per_dim[2]) << '\n';
        } else if (refine_cmd->parsed()) {
            cfg.target = parse_target(target);
            cfg.threads = threads;
            validate(cfg);
            const RefineResult r = refine(read_scalar_volume(in), cfg);
            write_volume(r.refined, out_path);
            if (!trace_path.empty()) write_file_atomic(trace_path, trace_to_csv(r.trace));
        } else if (cylinder->parsed()) {
            Dims d;
            Spacing s;
            if (!ref_file.empty()) {
                const AnyVolume v = read_volume(ref_file);
                std::visit([&](const auto& vol) { d = vol.dims(); s = vol.spacing(); }, v);
            } else if (!cyl_dims.empty()) {
                d = parse_dims(cyl_dims);
                s = parse_spacing(cyl_spacing);
            } else {
                throw InvalidArgument("cylinder needs --ref or --dims");
            }
            const double r = radius > 0.0 ? radius : inner_cylinder_radius(s);
            if (radius < 0.0) throw InvalidArgument("--radius-mm must be > 0");
            write_volume(rasterize_tube(load_path(path_file), r, d, s), out_path);
        } else if (grow->parsed()) {
            write_volume(grow_and_threshold(load_path(path_file), read_scalar_volume(intensity_file), grow_cfg),
                         out_path);
        } else if (metrics->parsed()) {
            const MetricReport r = evaluate(read_binary_volume(pred_file, p), read_binary_volume(ref_file, p));
            emit(out_path, metrics_csv_header() + metrics_csv_row(case_name, r), out);
        } else if (ttest->parsed()) {
            const TTestResult r = paired_t_test(parse_list(xs, "--x"), parse_list(ys, "--y"));
            out << "t,p_value,df\n" << format_double(r.t) << ',' << format_double(r.p_value) << ',' << r.df << '\n';
        }
        return 0;
    } catch (const InvalidArgument& e) {
        err << "voltopo: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "voltopo: " << e.what() << '\n';
        return 2;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace voltopo::cli
