#include <CLI11.hpp>
#include <cstdio>

#include "fbembed/pipeline.hpp"

// Batch front end. Exit codes: 0 success, 2 config error, 3 stage failure,
// 4 unpushable.

int main(int argc, char** argv) {
    CLI::App app{"proper embeddings of punctured planar domains into C^2: "
                 "basin construction and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;
    int verbosity = 1;
    app.add_option("--config", config_path, "run configuration (JSON)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "probe/render threads (0 = auto)");
    app.add_option("--verbosity", verbosity, "0 silent, 1 stages, 2 files");

    for (const char* name : {"classify", "embed", "check-lemma2", "push", "iterate",
                             "probe", "render", "full-pipeline"})
        app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);

    fbembed::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = fbembed::parse_config(config_path);
    } catch (const fbembed::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    const fbembed::RunReport rep =
        fbembed::run_subcommand(sub, cfg, out_dir, threads, verbosity);
    if (rep.exit_code != 0) std::fprintf(stderr, "%s\n", rep.failure.c_str());
    return rep.exit_code;
}
