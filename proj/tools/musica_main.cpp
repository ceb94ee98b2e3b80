#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "musica/cnr.hpp"
#include "musica/config.hpp"
#include "musica/imageio.hpp"
#include "musica/pipeline.hpp"
#include "musica/report.hpp"

namespace fs = std::filesystem;

namespace {

using musica::RunConfig;

// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 processing error.
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitProcessing = 3;

/// Values staged by command-line flags.  They are merged over the config
/// file's values only where the user actually passed the flag, so precedence
/// is: built-in defaults, then config file, then explicit flags.
struct FlagSet {
    RunConfig values;
    std::string config_path;
};

void add_parameter_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->set_help_flag("--help", "print this help and exit");
    cmd->add_option("--config", flags.config_path,
                    "file of key = value lines, applied before other flags");
    cmd->add_option("--mode", flags.values.mode, "conventional or multistage");
    cmd->add_option("--levels", flags.values.levels, "pyramid depth (default 7)");
    cmd->add_option("--p", flags.values.p, "amplification exponent in (0, 1] (default 0.5)");
    cmd->add_option("--xc", flags.values.xc, "cutoff below which amplification is linear (default 0.01)");
    cmd->add_option("--a", flags.values.a, "global amplification gain (default 1)");
    cmd->add_option("--m", flags.values.m, "coefficient magnitude bound (default 1)");
    cmd->add_flag("--denoise,!--no-denoise", flags.values.denoise,
                  "denoise after multistage enhancement (default on)");
    cmd->add_option("--h", flags.values.h, "denoiser filtering strength (default 0.1)");
    cmd->add_option("--patch", flags.values.patch, "denoiser patch size, odd (default 7)");
    cmd->add_option("--search", flags.values.search, "denoiser search window, odd (default 21)");
    cmd->add_option("--bins", flags.values.bins, "noise histogram bin count (default 256)");
    cmd->add_option("--jobs", flags.values.jobs, "worker threads for batch processing (default 1)");
    cmd->add_option("--depth", flags.values.depth, "output bit depth, 8 or 16 (default 16)");
    cmd->add_flag("--timing,!--no-timing", flags.values.timing,
                  "record wall-clock milliseconds in reports (default off; timed "
                  "reports are not byte-reproducible)");
}

RunConfig resolve_config(const CLI::App* cmd, const FlagSet& flags) {
    RunConfig out;
    if (!flags.config_path.empty())
        musica::apply_config_file(out, flags.config_path);

    const auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (passed("--mode")) out.mode = flags.values.mode;
    if (passed("--levels")) out.levels = flags.values.levels;
    if (passed("--p")) out.p = flags.values.p;
    if (passed("--xc")) out.xc = flags.values.xc;
    if (passed("--a")) out.a = flags.values.a;
    if (passed("--m")) out.m = flags.values.m;
    if (passed("--denoise")) out.denoise = flags.values.denoise;
    if (passed("--h")) out.h = flags.values.h;
    if (passed("--patch")) out.patch = flags.values.patch;
    if (passed("--search")) out.search = flags.values.search;
    if (passed("--bins")) out.bins = flags.values.bins;
    if (passed("--jobs")) out.jobs = flags.values.jobs;
    if (passed("--depth")) out.depth = flags.values.depth;
    if (passed("--timing")) out.timing = flags.values.timing;
    return out;
}

void validate_settings(const RunConfig& cfg) {
    musica::to_pipeline_config(cfg);  // checks mode and both parameter records
    if (cfg.bins < 1) throw musica::ValidationError("bins must be at least 1");
    if (cfg.jobs < 1) throw musica::ValidationError("jobs must be at least 1");
    if (cfg.depth != 8 && cfg.depth != 16)
        throw musica::ValidationError("depth must be 8 or 16");
}

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw musica::IoError("cannot create directory '" + dir + "': " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw musica::IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out)
        throw musica::IoError("error while writing '" + path + "'");
}

musica::ReportRow stats_row(std::string image, std::string method, const musica::CnrReport& rep,
                            double improvement, double elapsed_ms) {
    musica::ReportRow r;
    r.image = std::move(image);
    r.method = std::move(method);
    r.mean = rep.mean;
    r.stddev = rep.stddev;
    r.median = rep.median;
    r.q1 = rep.q1;
    r.q3 = rep.q3;
    r.min = rep.min;
    r.max = rep.max;
    r.noise_level = rep.noise_level;
    r.improvement_pct = improvement;
    r.elapsed_ms = elapsed_ms;
    return r;
}

int cmd_enhance(const RunConfig& cfg, const std::string& input, const std::string& out_path) {
    const musica::PipelineConfig pipeline = musica::to_pipeline_config(cfg);
    const musica::SourceImage src = musica::load_grayscale(input);
    const musica::Image result = musica::enhance(musica::normalize_minmax(src.pixels), pipeline);
    musica::save_grayscale(result, out_path, cfg.depth);
    std::cout << musica::serialize_config(cfg);
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& inputs,
                 const std::string& out_dir, std::string csv_path) {
    ensure_directory(out_dir);
    if (csv_path.empty())
        csv_path = (fs::path(out_dir) / "cnr_report.csv").string();

    std::vector<musica::ReportRow> rows;
    for (const std::string& input : inputs) {
        const auto start = std::chrono::steady_clock::now();
        const musica::SourceImage src = musica::load_grayscale(input);
        const std::string name = fs::path(input).filename().string();
        try {
            const musica::CnrReport rep = musica::cnr_image(src.pixels, cfg.bins);
            // The CNR map is written min-max rescaled so it is displayable;
            // the row's min/max columns record the rescaling interval.
            const fs::path map_path =
                fs::path(out_dir) / (fs::path(name).stem().string() + "_cnr.png");
            musica::save_grayscale(musica::normalize_minmax(rep.cnr), map_path.string(),
                                   cfg.depth);
            rows.push_back(stats_row(name, "original", rep, 0.0,
                                     cfg.timing ? ms_since(start) : 0.0));
        } catch (const musica::DegenerateNoiseError& e) {
            std::cerr << "musica: warning: " << input << ": " << e.what() << '\n';
            musica::ReportRow r;
            r.image = name;
            r.method = "degenerate";
            rows.push_back(r);
        }
    }
    write_text_file(csv_path, musica::render_csv(rows));
    return 0;
}

std::vector<musica::ReportRow> batch_rows_for(const fs::path& path, const RunConfig& cfg) {
    musica::PipelineConfig conventional = musica::to_pipeline_config(cfg);
    conventional.mode = musica::Mode::conventional;
    musica::PipelineConfig multistage = conventional;
    multistage.mode = musica::Mode::multistage;

    const std::string name = path.filename().string();
    const musica::SourceImage src = musica::load_grayscale(path.string());
    const musica::Image norm = musica::normalize_minmax(src.pixels);

    std::vector<musica::ReportRow> rows;
    auto start = std::chrono::steady_clock::now();
    const musica::CnrReport original = musica::cnr_image(norm, cfg.bins);
    rows.push_back(stats_row(name, "original", original, 0.0,
                             cfg.timing ? ms_since(start) : 0.0));

    start = std::chrono::steady_clock::now();
    const musica::CnrReport conv =
        musica::cnr_image(musica::enhance(norm, conventional), cfg.bins);
    rows.push_back(stats_row(name, "conventional", conv,
                             musica::improvement_pct(original, conv),
                             cfg.timing ? ms_since(start) : 0.0));

    start = std::chrono::steady_clock::now();
    const musica::CnrReport multi =
        musica::cnr_image(musica::enhance(norm, multistage), cfg.bins);
    rows.push_back(stats_row(name, "multistage", multi,
                             musica::improvement_pct(original, multi),
                             cfg.timing ? ms_since(start) : 0.0));
    return rows;
}

int cmd_batch(const RunConfig& cfg, const std::string& dir, const std::string& out_dir) {
    std::vector<fs::path> inputs;
    {
        std::error_code ec;
        fs::directory_iterator it(dir, ec);
        if (ec)
            throw musica::IoError("cannot read directory '" + dir + "': " + ec.message());
        for (const auto& entry : it) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (ext == ".png" || ext == ".pgm") inputs.push_back(entry.path());
        }
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty())
        throw musica::IoError("no .png or .pgm images in '" + dir + "'");

    struct Slot {
        std::vector<musica::ReportRow> rows;
        std::string failure;
    };
    std::vector<Slot> slots(inputs.size());

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < inputs.size(); i = next.fetch_add(1)) {
            try {
                slots[i].rows = batch_rows_for(inputs[i], cfg);
            } catch (const std::exception& e) {
                slots[i].failure = e.what();
            }
        }
    };
    const std::size_t threads =
        std::min(static_cast<std::size_t>(cfg.jobs), inputs.size());
    std::vector<std::thread> helpers;
    for (std::size_t t = 1; t < threads; ++t) helpers.emplace_back(worker);
    worker();
    for (std::thread& t : helpers) t.join();

    std::vector<musica::ReportRow> rows;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!slots[i].failure.empty()) {
            ++failed;
            std::cerr << "musica: " << inputs[i].string() << ": " << slots[i].failure
                      << " (image skipped)\n";
            continue;
        }
        rows.insert(rows.end(), slots[i].rows.begin(), slots[i].rows.end());
    }
    if (failed == inputs.size()) {
        std::cerr << "musica: all " << inputs.size() << " images failed\n";
        return kExitProcessing;
    }

    ensure_directory(out_dir);
    write_text_file((fs::path(out_dir) / "report.csv").string(), musica::render_csv(rows));
    write_text_file((fs::path(out_dir) / "boxplot.svg").string(),
                    musica::render_boxplot_svg(rows));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grayscale radiograph contrast enhancement and CNR evaluation"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    FlagSet en_flags, ev_flags, ba_flags;
    std::string en_input, en_out;
    std::vector<std::string> ev_inputs;
    std::string ev_out = ".", ev_csv;
    std::string ba_dir, ba_out;

    CLI::App* enhance = app.add_subcommand("enhance", "enhance one image and write the result");
    enhance->add_option("input", en_input, "source image (.png or .pgm)")->required();
    enhance->add_option("-o,--out", en_out, "output image path")->required();
    add_parameter_flags(enhance, en_flags);

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "write CNR maps and a statistics report");
    evaluate->add_option("inputs", ev_inputs, "images to evaluate")->required();
    evaluate->add_option("-o,--out", ev_out, "output directory (default: current)");
    evaluate->add_option("--csv", ev_csv, "report path (default: <out>/cnr_report.csv)");
    add_parameter_flags(evaluate, ev_flags);

    CLI::App* batch = app.add_subcommand(
        "batch", "compare original, conventional, and multistage over a directory");
    batch->add_option("input_dir", ba_dir, "directory of .png/.pgm images")->required();
    batch->add_option("-o,--out", ba_out, "directory for report.csv and boxplot.svg")->required();
    add_parameter_flags(batch, ba_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (enhance->parsed()) {
            const RunConfig cfg = resolve_config(enhance, en_flags);
            validate_settings(cfg);
            return cmd_enhance(cfg, en_input, en_out);
        }
        if (evaluate->parsed()) {
            const RunConfig cfg = resolve_config(evaluate, ev_flags);
            validate_settings(cfg);
            return cmd_evaluate(cfg, ev_inputs, ev_out, ev_csv);
        }
        const RunConfig cfg = resolve_config(batch, ba_flags);
        validate_settings(cfg);
        return cmd_batch(cfg, ba_dir, ba_out);
    } catch (const musica::ValidationError& e) {
        std::cerr << "musica: " << e.what() << '\n';
        return kExitUsage;
    } catch (const musica::IoError& e) {
        std::cerr << "musica: " << e.what() << '\n';
        return kExitIo;
    } catch (const musica::FormatError& e) {
        std::cerr << "musica: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "musica: " << e.what() << '\n';
        return kExitProcessing;
    }
}
