#include "relu_morse/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "relu_morse/errors.hpp"
#include "relu_morse/export.hpp"
#include "relu_morse/svg.hpp"

namespace relu_morse {

namespace {

struct RunConfig {
    std::string input;
    std::string output;
    std::string fixture;
    std::uint64_t seed = 0;
    std::vector<std::size_t> arch;
    Tolerances tol;
    bool local_check = false;
    std::vector<double> render_box;
    int corrupt_pair = -1;
};

// Failures the user can fix at the shell: bad paths, bad schema.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ReluNetwork load_network(const RunConfig& cfg) {
    if (!cfg.fixture.empty()) {
        if (!cfg.input.empty()) throw UsageError("--input and --fixture are mutually exclusive");
        if (cfg.fixture == "net-b") return fixture_net_b();
        if (cfg.fixture == "net-b-negated") return negate_output(fixture_net_b());
        throw UsageError("unknown fixture '" + cfg.fixture + "'");
    }
    if (cfg.input.empty()) throw UsageError("one of --input or --fixture is required");
    std::ifstream in(cfg.input);
    if (!in) throw UsageError("cannot read " + cfg.input);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return network_from_json(buf.str());
    } catch (const Error& e) {
        throw UsageError(cfg.input + ": " + e.what());
    }
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.output.empty()) {
        out << text;
        return;
    }
    namespace fs = std::filesystem;
    fs::path target(cfg.output);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot write " + tmp.string());
        f << text;
        if (!f.flush()) throw UsageError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw UsageError("cannot write " + target.string());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

bool is_shallow(const ReluNetwork& net) {
    const auto& a = net.architecture();
    return a.hidden_layers() == 1 && a.width(1) == a.input_dim() + 1;
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.fixture.empty()) {
        emit(cfg, network_to_json(load_network(cfg)) + "\n", out);
        return 0;
    }
    if (cfg.arch.empty()) throw UsageError("gen needs --arch or --fixture");
    Architecture arch;
    try {
        arch = Architecture::from_external(cfg.arch);
    } catch (const Error& e) {
        throw UsageError(std::string("--arch: ") + e.what());
    }
    emit(cfg, network_to_json(random_network(arch, cfg.seed)) + "\n", out);
    return 0;
}

int cmd_build(const RunConfig& cfg, std::ostream& out) {
    auto complex = build_complex(load_network(cfg), BuildOptions{cfg.tol});
    emit(cfg, dump(complex_to_json(complex)), out);
    return 0;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
    auto net = load_network(cfg);
    auto complex = build_complex(net, BuildOptions{cfg.tol});
    Json j;
    j["vertices"] = classification_to_json(complex, classify_all(complex));
    if (is_shallow(net)) j["shallow"] = shallow_to_json(analyze_shallow(complex));
    emit(cfg, dump(j), out);
    return 0;
}

int cmd_dgvf(const RunConfig& cfg, std::ostream& out) {
    auto net = load_network(cfg);
    auto complex = build_complex(net, BuildOptions{cfg.tol});
    auto matching = build_dgvf(complex);
    if (cfg.corrupt_pair >= 0) matching = drop_pair(matching, static_cast<std::size_t>(cfg.corrupt_pair));
    auto cc = compactify(complex);

    Json report;
    auto violations = validate_matching(matching, cc);
    report["valid"] = violations.empty();
    auto acyclic = is_acyclic(matching, cc);
    report["acyclic"] = acyclic.acyclic;
    auto perfect = verify_relative_perfectness(cc, matching);
    report["relative_perfectness"] = perfectness_to_json(perfect);
    bool pass = violations.empty() && acyclic.acyclic && perfect.pass;
    if (acyclic.acyclic) {
        auto cellular = betti(chain_complex(cc));
        auto morse = betti(morse_complex(cc, matching));
        report["betti"] = cellular;
        report["morse_betti"] = morse;
        pass = pass && same_ranks(cellular, morse);
    }
    if (cfg.local_check) {
        std::size_t disagreements = 0;
        for (const auto& c : complex.cells()) {
            if (!c.bounded_above.value_or(false)) continue;
            auto a = local_pair(net, c.signs, cfg.tol);
            if (a.partner != matching.partner(c.signs)) ++disagreements;
        }
        report["local_check"] = disagreements == 0 ? "pass" : "fail";
        report["local_disagreements"] = disagreements;
        pass = pass && disagreements == 0;
    }
    report["result"] = pass ? "pass" : "fail";

    Json j;
    j["matching"] = matching_to_json(matching);
    j["report"] = std::move(report);
    emit(cfg, dump(j), out);
    return 0;
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
    auto net = load_network(cfg);
    if (net.input_dim() != 2) throw DimensionError("render needs n0 = 2, got " + std::to_string(net.input_dim()));
    // Flat cells are drawn without arrows; critical markers need a Morse complex.
    auto complex = build_complex(net, BuildOptions::genericity_only(cfg.tol));
    RenderInput in;
    in.field = orientation_field(complex, FlatPolicy::Mark);
    if (!cfg.render_box.empty()) {
        if (cfg.render_box.size() != 4) throw UsageError("--render-box takes xmin,xmax,ymin,ymax");
        in.box = RenderBox{cfg.render_box[0], cfg.render_box[1], cfg.render_box[2], cfg.render_box[3]};
    }
    try {
        auto full = build_complex(net, BuildOptions{cfg.tol});
        auto classes = classify_all(full);
        in.matching = build_dgvf(full, classes);
        in.classes = std::move(classes);
    } catch (const FlatCellError&) {
    } catch (const InjectivityError&) {
    } catch (const GenericityError&) {
    }
    emit(cfg, render_svg(complex, in), out);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete Morse analysis of ReLU networks", "relu-morse"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto input_flags = [&](CLI::App* sub) {
        sub->add_option("--input,-i", cfg.input, "Weight file (JSON)");
        sub->add_option("--fixture", cfg.fixture, "Built-in network: net-b, net-b-negated");
        sub->add_option("--output,-o", cfg.output, "Output path (default: stdout)");
        sub->add_option("--sign-tol", cfg.tol.sign, "Zero test for node values")->check(CLI::PositiveNumber);
        sub->add_option("--lp-tol", cfg.tol.lp_feasibility, "LP feasibility tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--lp-pivot-tol", cfg.tol.lp_pivot, "LP pivot tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--flat-tol", cfg.tol.flat, "Relative directional-derivative floor")->check(CLI::PositiveNumber);
    };

    auto* gen = app.add_subcommand("gen", "Write a random or built-in weight file");
    gen->add_option("--arch", cfg.arch, "Layer widths n0,...,nm,1")->delimiter(',')->check(CLI::PositiveNumber);
    gen->add_option("--seed", cfg.seed, "Random seed");
    gen->add_option("--fixture", cfg.fixture, "Built-in network: net-b, net-b-negated");
    gen->add_option("--output,-o", cfg.output, "Output path (default: stdout)");

    auto* build = app.add_subcommand("build", "Export the canonical polyhedral complex");
    input_flags(build);
    auto* classify = app.add_subcommand("classify", "Classify vertices as regular or critical");
    input_flags(classify);
    auto* dgvf = app.add_subcommand("dgvf", "Build and verify the discrete gradient vector field");
    input_flags(dgvf);
    dgvf->add_flag("--local-check", cfg.local_check, "Cross-check every pair against the local LP rule");
    dgvf->add_option("--corrupt-matching", cfg.corrupt_pair, "Drop the given pair before verifying")->group("");
    auto* render = app.add_subcommand("render", "Draw a 2-D complex as SVG");
    input_flags(render);
    render->add_option("--render-box", cfg.render_box, "xmin,xmax,ymin,ymax")->delimiter(',');

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) return cmd_gen(cfg, out);
        if (*build) return cmd_build(cfg, out);
        if (*classify) return cmd_classify(cfg, out);
        if (*dgvf) return cmd_dgvf(cfg, out);
        if (*render) return cmd_render(cfg, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        Json j;
        j["error"] = e.kind();
        j["message"] = e.what();
        err << j.dump() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace relu_morse
