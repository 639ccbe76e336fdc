// Command-line entry point: dataset construction, batch evaluation and the
// tutor HTTP service.

#include <CLI11.hpp>

#include <iostream>

#include "mentor/config.hpp"
#include "mentor/dataset.hpp"
#include "mentor/evaluation.hpp"
#include "mentor/prompts.hpp"
#include "mentor/service.hpp"

namespace {

mentor::AppConfig config_for(const std::string& path) {
    std::optional<std::filesystem::path> file;
    if (!path.empty()) {
        file = path;
    } else if (auto env = mentor::process_env("MENTOR_CONFIG")) {
        file = *env;
    }
    return mentor::load_config(file);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-oriented tutoring toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (default: $MENTOR_CONFIG)");

    // dataset build
    auto* dataset = app.add_subcommand("dataset", "Goal-to-skill dataset tools");
    dataset->require_subcommand(1);
    auto* build = dataset->add_subcommand("build", "Filter, split and annotate a posting corpus");
    std::string corpus, out_dir, dataset_backend;
    mentor::dataset::BuildOptions build_opts;
    build->add_option("--corpus", corpus, "Postings as .jsonl or .csv")->required()->check(CLI::ExistingFile);
    build->add_option("--min-words", build_opts.min_words, "Minimum posting length in words")
        ->capture_default_str();
    build->add_option("--n-train", build_opts.n_train, "Training samples")->capture_default_str();
    build->add_option("--n-valid", build_opts.n_valid, "Validation samples")->capture_default_str();
    build->add_option("--seed", build_opts.seed, "Split seed")->required();
    build->add_option("--out", out_dir, "Output directory")->required();
    build->add_option("--backend", dataset_backend, "Backend id for the dataset-builder role");

    // eval
    auto* eval = app.add_subcommand("eval", "Score skills, paths or content");
    std::string eval_kind, input_dir, mode = "deterministic", judge_backend, report;
    eval->add_option("kind", eval_kind, "skills | path | content")
        ->required()
        ->check(CLI::IsMember({"skills", "path", "content"}));
    eval->add_option("--input", input_dir, "Directory holding cases.jsonl")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--mode", mode, "judge | deterministic")
        ->capture_default_str()
        ->check(CLI::IsMember({"judge", "deterministic"}));
    eval->add_option("--judge-backend", judge_backend, "Backend id used for the judge role");
    eval->add_option("--report", report, "CSV report path")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the tutor HTTP service");
    std::string host;
    int port = 0;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = config_for(config_path);
        mentor::Gateway gateway(config.gateway);
        mentor::configure_gateway(config, gateway);

        if (*build) {
            if (!dataset_backend.empty()) gateway.route(mentor::roles::kDatasetBuilder, dataset_backend);
            auto postings = mentor::dataset::load_corpus(corpus);
            mentor::dataset::DatasetBuilder builder(gateway);
            auto r = mentor::dataset::build_dataset(builder, postings, build_opts, out_dir);
            std::cout << "corpus=" << r.corpus_size << " retained=" << r.retained << " train=" << r.train_records
                      << " valid=" << r.valid_records << " out=" << out_dir << "\n";
            return 0;
        }
        if (*eval) {
            if (!judge_backend.empty()) gateway.route(mentor::roles::kJudge, judge_backend);
            mentor::Evaluator evaluator(gateway);
            auto run = mentor::run_evaluation(mentor::parse_eval_kind(eval_kind), input_dir,
                                              mentor::parse_scoring_mode(mode), evaluator, report);
            std::cout << "scored " << run.cases << " cases -> " << report << "\n";
            return 0;
        }
        if (*serve) {
            if (!host.empty()) config.server.host = host;
            if (port != 0) config.server.port = port;
            mentor::DocumentStore store(config.storage_dir);
            mentor::TutorService service(gateway, store, mentor::make_search(config), mentor::make_embedder(config),
                                         std::make_shared<mentor::RandomIds>(), config.service);
            mentor::run_http_server(service, config.server);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
