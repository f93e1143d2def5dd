#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "truncmax/truncmax.hpp"

namespace {

using truncmax::fmt_sig;

struct ParamFlags {
    std::string kind = "scalar";
    int n = 1;
    std::vector<double> a{1.0};
    std::vector<double> b{2.718281828459045};
    std::vector<int> partition;
};

void add_param_flags(CLI::App& cmd, ParamFlags& pf) {
    cmd.add_option("--kind", pf.kind, "Operator kind")
        ->check(CLI::IsMember({"scalar", "strong", "general"}))
        ->capture_default_str();
    cmd.add_option("-n", pf.n, "Ambient dimension (scalar kind only)")->capture_default_str();
    cmd.add_option("-a", pf.a, "Inner radii, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    cmd.add_option("-b", pf.b, "Outer radii, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    cmd.add_option("--partition", pf.partition,
                   "Factor dimensions for the general kind, comma separated")
        ->delimiter(',');
}

truncmax::TruncationParams make_params(const ParamFlags& pf) {
    if (pf.kind == "scalar") {
        truncmax::detail::require(pf.a.size() == 1 && pf.b.size() == 1,
                                  "scalar kind takes exactly one -a and one -b value");
        return truncmax::TruncationParams::scalar(pf.n, pf.a[0], pf.b[0]);
    }
    if (pf.kind == "strong") return truncmax::TruncationParams::strong(pf.a, pf.b);
    truncmax::detail::require(!pf.partition.empty(), "general kind requires --partition");
    return truncmax::TruncationParams::general(pf.partition, pf.a, pf.b);
}

int cmd_constant(const ParamFlags& pf) {
    const auto p = make_params(pf);
    std::cout << "kind   " << truncmax::kind_name(p.kind) << '\n';
    std::cout << "n      " << p.total_dim() << '\n';
    std::cout << "sharp  " << fmt_sig(truncmax::sharp_l1_norm(p)) << '\n';
    std::cout << "crude  " << fmt_sig(truncmax::crude_upper_bound(p)) << '\n';
    if (p.kind == truncmax::Kind::scalar && p.factors[0].a < p.factors[0].b)
        std::cout << "growth " << fmt_sig(truncmax::growth_rate_check(p)) << '\n';
    return 0;
}

int cmd_apply(const ParamFlags& pf, const std::string& in, const std::string& out, int radii,
              int threads, bool csv, double csv_h, double csv_lo) {
    const auto p = make_params(pf);
    const truncmax::GridFunction f =
        csv ? truncmax::read_grid_csv(in, csv_h, csv_lo) : truncmax::read_grid(in);
    const truncmax::GridFunction result =
        truncmax::apply_truncated_max(f, p, truncmax::RadiiResolution{radii}, threads);
    truncmax::write_grid(result, out);
    const double l1_in = truncmax::l1_norm(f);
    const double l1_out = truncmax::l1_norm(result);
    std::cout << "l1-in  " << fmt_sig(l1_in) << '\n';
    std::cout << "l1-out " << fmt_sig(l1_out) << '\n';
    std::cout << "ratio  " << fmt_sig(l1_out / l1_in) << '\n';
    return 0;
}

int cmd_converge(const ParamFlags& pf, const truncmax::StudyConfig& partial,
                 const std::string& out, const std::string& format) {
    truncmax::StudyConfig cfg = partial;
    cfg.params = make_params(pf);
    std::vector<std::string> violations;
    const auto records = truncmax::convergence_study(cfg, &violations);

    std::ostringstream body;
    if (format == "json")
        body << truncmax::study_report_json(cfg.params, records, violations).dump(2) << '\n';
    else
        truncmax::write_records_csv(body, records);

    if (out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream os(out, std::ios::binary);
        truncmax::detail::require(os.good(), "cannot open '" + out + "'");
        os << body.str();
    }
    if (format != "json")
        for (const auto& v : violations) std::cerr << "warning: " << v << '\n';
    return 0;
}

int cmd_verify(std::uint64_t seed, int instances, bool corrupt, const std::string& out) {
    const auto suites = truncmax::run_verification_suites(seed, instances, corrupt);
    bool all_pass = true;
    nlohmann::json j;
    j["seed"] = seed;
    j["instances_per_kind"] = instances;
    j["suites"] = nlohmann::json::array();
    for (const auto& s : suites) {
        all_pass = all_pass && s.pass;
        j["suites"].push_back({{"name", s.name}, {"pass", s.pass}, {"detail", s.detail}});
    }
    j["pass"] = all_pass;

    const std::string body = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << body;
    } else {
        std::ofstream os(out, std::ios::binary);
        truncmax::detail::require(os.good(), "cannot open '" + out + "'");
        os << body;
    }
    if (!all_pass) {
        for (const auto& s : suites)
            if (!s.pass) std::cerr << "verification failed: " << s.name << " (" << s.detail << ")\n";
        return 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truncated maximal averages: sharp constants, grid kernels, verification"};
    app.require_subcommand(1);

    ParamFlags pf;

    auto* constant = app.add_subcommand("constant", "Print the sharp constant and crude bound");
    add_param_flags(*constant, pf);

    auto* apply = app.add_subcommand("apply", "Apply the operator to a grid file");
    add_param_flags(*apply, pf);
    std::string in_path, out_path;
    int radii = 64, threads = 0;
    double csv_h = 0.0, csv_lo = 0.0;
    apply->add_option("--in", in_path, "Input grid file")->required();
    apply->add_option("--out", out_path, "Output grid file")->required();
    apply->add_option("--radii", radii, "Radius samples per factor")->capture_default_str();
    apply->add_option("--threads", threads, "Worker cap (0: TRUNCMAX_THREADS or hardware)");
    auto* csv_h_opt =
        apply->add_option("--csv-h", csv_h, "Treat input as 1-column CSV (n=1) with this spacing");
    apply->add_option("--csv-lo", csv_lo, "Domain start for CSV input")->capture_default_str();

    auto* converge = app.add_subcommand("converge", "Extremal-sequence convergence study");
    add_param_flags(*converge, pf);
    truncmax::StudyConfig study;
    study.m_list = {8.0, 16.0, 32.0, 64.0};
    study.h_list = {1.0 / 512.0};
    study.radii_count = 128;
    std::string converge_out, format = "csv";
    converge->add_option("--m-list", study.m_list, "Extremal indices m, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    converge->add_option("--h-list", study.h_list, "Grid spacings, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    converge->add_option("--radii", study.radii_count, "Radius samples per factor")
        ->capture_default_str();
    converge->add_option("--cells", study.cells_per_axis, "Cells per axis (0: auto)");
    converge->add_option("--threads", study.threads, "Worker cap");
    converge->add_option("--out", converge_out, "Report path (default: stdout)");
    converge->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    auto* verify = app.add_subcommand("verify", "Run the randomized verification suites");
    std::uint64_t seed = 1;
    int instances = 8;
    bool corrupt = false;
    std::string verify_out;
    verify->add_option("--seed", seed, "Seed for the randomized suites")->capture_default_str();
    verify->add_option("--instances", instances, "Instances per kind for the randomized suites")
        ->capture_default_str();
    verify->add_option("--out", verify_out, "Verdict path (default: stdout)");
    verify->add_flag("--corrupt-kernel", corrupt, "")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (constant->parsed()) return cmd_constant(pf);
        if (apply->parsed())
            return cmd_apply(pf, in_path, out_path, radii, threads, csv_h_opt->count() > 0, csv_h,
                             csv_lo);
        if (converge->parsed()) return cmd_converge(pf, study, converge_out, format);
        if (verify->parsed()) return cmd_verify(seed, instances, corrupt, verify_out);
    } catch (const truncmax::resolution_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const truncmax::budget_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
