#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "stz/errors.hpp"
#include "stz/pipeline.hpp"
#include "stz/synth.hpp"

namespace {

void print_counts(const stz::ModeReport& m) {
    const auto& c = m.counts;
    std::cout << stz::to_string(m.mode) << ": " << c.total << " zones, " << c.fit_failures << " fit failures, "
              << c.lb_failures << " Ljung-Box failures, " << c.ml_failures << " McLeod-Li failures ("
              << c.both_failures << " both), " << c.included << " included\n";
}

int run_stage(const std::string& config, stz::PipelineStage stage) {
    stz::RunReport rep = stz::run_pipeline(std::filesystem::path(config), stage);
    stz::write_exports(rep, stage);
    for (const auto& m : rep.modes) {
        std::cout << stz::to_string(m.mode) << ": " << m.panel.zones() << " zones x " << m.panel.weeks()
                  << " weeks";
        if (!m.low_volume_removed.empty()) std::cout << ", " << m.low_volume_removed.size() << " low-volume removed";
        if (!m.imputed_zones.empty()) std::cout << ", " << m.imputed_zones.size() << " imputed";
        std::cout << '\n';
        if (stage != stz::PipelineStage::Ingest) print_counts(m);
        if (!m.regression_error.empty()) std::cout << "  regression skipped: " << m.regression_error << '\n';
        for (const auto& [scheme, err] : m.scheme_errors) std::cout << "  " << scheme << ": " << err << '\n';
    }
    const auto dir = rep.config.resolve(rep.config.output_dir);
    std::cout << rep.exports.size() << " files written to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatiotemporal trip analytics: weekly panels, ARIMA-GARCH filtering, MLR and Moran's I"};
    app.require_subcommand(1);

    std::string config;
    struct Stage {
        const char* name;
        const char* help;
        stz::PipelineStage stage;
    };
    const Stage stages[] = {
        {"ingest", "Build and validate the weekly panels", stz::PipelineStage::Ingest},
        {"fit-ts", "Fit per-zone ARIMA-GARCH models; write residuals and zone outcomes", stz::PipelineStage::Temporal},
        {"regress", "Pooled stepwise regression of residuals on zone covariates", stz::PipelineStage::Regression},
        {"moran", "Global Moran's I per temporal window", stz::PipelineStage::Spatial},
        {"lisa", "Local Moran's I exports (GeoJSON and CSV)", stz::PipelineStage::Spatial},
        {"run", "Full pipeline with report.json", stz::PipelineStage::Spatial},
    };
    std::optional<stz::PipelineStage> chosen;
    for (const auto& s : stages) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("-c,--config", config, "Pipeline JSON config")->required()->check(CLI::ExistingFile);
        const auto stage = s.stage;
        sub->callback([&chosen, stage] { chosen = stage; });
    }

    stz::SynthOptions synth;
    std::string out_dir = "synthetic";
    auto* sub = app.add_subcommand("synth", "Write the seeded synthetic lattice dataset");
    sub->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    sub->add_option("--weeks", synth.weeks, "Number of whole weeks")->capture_default_str();
    sub->add_option("--in-mean", synth.in_mean, "ARCH-in-mean strength of the planted blocks")->capture_default_str();
    sub->add_option("--arch-alpha", synth.arch_alpha, "ARCH coefficient of the planted blocks")->capture_default_str();
    sub->callback([&] {
        const auto man = stz::write_synthetic_dataset(out_dir, synth);
        std::cout << "wrote " << man.files.size() << " files to " << out_dir << " (" << man.zone_ids.size()
                  << " zones, high block";
        for (const auto& z : man.high_block) std::cout << ' ' << z;
        std::cout << ")\n";
    });

    try {
        app.parse(argc, argv);
        if (chosen) return run_stage(config, *chosen);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const stz::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
