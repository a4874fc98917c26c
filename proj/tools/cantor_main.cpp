// Command-line front door for the cutting-and-stacking engine: file checks,
// construction runs, orbit reports, and tower diagrams.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "cantor/diagram.hpp"
#include "cantor/io.hpp"

using namespace cantor;

namespace {

Rational parse_threshold(const std::string& s) { return Dyadic::parse(s).to_rational(); }

ConstructionState load_state(const std::string& dir) {
    return parse_checkpoint(read_file(dir + "/checkpoint.ck"));
}

int cmd_check(const std::string& path) {
    PartialTransformation t = parse_pt(read_file(path));
    auto report = t.audit_proper();
    if (report.empty()) {
        std::cout << "proper\n";
        return 0;
    }
    for (const auto& f : report) std::cerr << f.clause << ": " << f.detail << "\n";
    return 1;
}

int cmd_loops(const std::string& path) {
    PartialTransformation t = parse_pt(read_file(path));
    LoopDecomposition dec = decompose_loops(t);
    for (const auto& l : dec.loops) {
        std::cout << "loop head=" << l.head().text() << " blocks=" << l.length()
                  << " width=" << l.width().text() << " exit-image=" << t.eval(l.exit()).text()
                  << "\n";
    }
    return 0;
}

int cmd_thin(const std::string& path, const std::string& head_text, const std::string& eps_text,
             bool leftover, const std::string& out) {
    PartialTransformation t = parse_pt(read_file(path));
    Word head = Word::parse(head_text);
    LoopDecomposition dec = decompose_loops(t);
    auto it = dec.locate.find(head);
    if (it == dec.locate.end()) fail(ErrorKind::PreconditionViolated, "no loop block " + head_text);
    const OpenLoop& loop = dec.loops[it->second.first];
    Dyadic eps = Dyadic::parse(eps_text);
    ThinOutcome res = leftover ? thin_loop_with_leftover(t, loop, eps) : thin_loop(t, loop, eps);
    std::string text = serialize_pt(res.t);
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
    std::cerr << "thinned loop head=" << res.head.text() << " exit=" << res.exit.text()
              << " blocks=" << res.block_count << "\n";
    for (const Word& w : res.leftover) std::cerr << "leftover " << w.text() << "\n";
    return 0;
}

int cmd_escape(const std::string& path, const std::string& word_text, size_t depth) {
    PartialTransformation t = parse_pt(read_file(path));
    auto esc = find_escape(t, Word::parse(word_text), depth);
    if (!esc) {
        std::cout << "absent\n";
        return 0;
    }
    for (const Word& w : esc->elements) std::cout << w.text() << " ";
    std::cout << (esc->reduced ? "(reduced)" : "") << "\n";
    return 0;
}

int cmd_evenstage(const std::string& path, const std::string& out) {
    PartialTransformation t = even_stage(parse_pt(read_file(path)));
    std::string text = serialize_pt(t);
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
    return 0;
}

int cmd_build(int seed_bit, const std::string& enum_path, uint64_t stages, const std::string& out) {
    TestEnumeration e;
    if (!enum_path.empty()) e = parse_mlt(read_file(enum_path));
    ConstructionState st = run(init_state(seed_bit), e, stages);
    std::filesystem::create_directories(out);
    write_file(out + "/checkpoint.ck", serialize_checkpoint(st));
    std::string log;
    for (const auto& line : st.log) log += line + "\n";
    write_file(out + "/run.log", log);
    std::cout << "built to stage " << st.stage << ": " << st.transformation.block_count()
              << " blocks, checkpoint in " << out << "\n";
    return 0;
}

int cmd_orbit(const std::string& dir, const std::string& point_text, uint64_t steps) {
    ConstructionState st = load_state(dir);
    OrbitPoint p = parse_point(point_text);
    TowerIndex ix = TowerIndex::build(st.transformation);
    OrbitResult res = orbit_averages(st.transformation, &ix, p, st.target_set, steps);
    std::cout << trace_csv(res.trace);
    if (res.hit_undefined)
        std::cerr << "orbit undefined after step " << res.defined_steps - 1 << "\n";
    return 0;
}

int cmd_upcross(const std::string& dir, const std::string& point_text, const std::string& alpha,
                const std::string& beta, uint64_t horizon) {
    ConstructionState st = load_state(dir);
    OrbitPoint p = parse_point(point_text);
    TowerIndex ix = TowerIndex::build(st.transformation);
    OrbitResult res = orbit_averages(st.transformation, &ix, p, st.target_set, horizon);
    if (res.hit_undefined)
        std::cerr << "orbit truncated at step " << res.defined_steps << " (image stays finite)\n";
    uint64_t count = count_upcrossings(res.trace, parse_threshold(alpha), parse_threshold(beta));
    std::cout << "alpha,beta,count,horizon\n"
              << alpha << "," << beta << "," << count << "," << horizon << "\n";
    return 0;
}

int cmd_bishop(const std::string& dir, const std::string& alpha, const std::string& beta,
               uint64_t samples, uint64_t horizon, uint64_t seed) {
    ConstructionState st = load_state(dir);
    TowerIndex ix = TowerIndex::build(st.transformation);
    BishopReport rep = bishop_check(st.transformation, &ix, st.target_set, parse_threshold(alpha),
                                    parse_threshold(beta), samples, horizon, seed);
    std::cout << "lhs=" << rep.lhs_estimate << " rhs=" << rep.rhs_bound
              << " holds=" << (rep.holds ? "yes" : "no") << "\n";
    return rep.holds ? 0 : 1;
}

int cmd_diagram(const std::string& path, const std::string& format) {
    PartialTransformation t = parse_pt(read_file(path));
    if (format != "ascii" && format != "dot")
        fail(ErrorKind::ParseError, "format must be ascii or dot");
    std::cout << render_diagram(t, format == "dot" ? DiagramFormat::Dot : DiagramFormat::Ascii);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cutting-and-stacking transformations of Cantor space"};
    app.require_subcommand(1);

    std::string pt_path, out, head, eps, word_text, enum_path, state_dir, point_text;
    std::string alpha = "1/2^2", beta = "1/2^1", format = "ascii";
    bool leftover = false;
    size_t depth = 8;
    uint64_t stages = 0, steps = 100, horizon = 1000, samples = 1000, seed = 0;
    int seed_bit = 0;

    auto* c_check = app.add_subcommand("check", "audit a transformation file");
    c_check->add_option("pt", pt_path)->required();

    auto* c_loops = app.add_subcommand("loops", "list the open-loop decomposition");
    c_loops->add_option("pt", pt_path)->required();

    auto* c_thin = app.add_subcommand("thin", "thin a loop to a narrower width");
    c_thin->add_option("pt", pt_path)->required();
    c_thin->add_option("--loop", head, "a block of the loop to thin")->required();
    c_thin->add_option("--eps", eps, "new width, e.g. 1/2^3")->required();
    c_thin->add_flag("--leftover", leftover, "leave the all-ones strips untouched");
    c_thin->add_option("--out", out);

    auto* c_escape = app.add_subcommand("escape", "search for an escape sequence");
    c_escape->add_option("pt", pt_path)->required();
    c_escape->add_option("--word", word_text)->required();
    c_escape->add_option("--depth", depth);

    auto* c_even = app.add_subcommand("evenstage", "split every tower top once");
    c_even->add_option("pt", pt_path)->required();
    c_even->add_option("--out", out);

    auto* c_build = app.add_subcommand("build", "run the staged construction");
    c_build->add_option("--seed-bit", seed_bit)->required();
    c_build->add_option("--enum", enum_path);
    c_build->add_option("--stages", stages)->required();
    c_build->add_option("--out", out)->required();

    auto* c_orbit = app.add_subcommand("orbit", "emit an orbit trace CSV");
    c_orbit->add_option("--state", state_dir)->required();
    c_orbit->add_option("--point", point_text)->required();
    c_orbit->add_option("--steps", steps);

    auto* c_up = app.add_subcommand("upcross", "count upcrossings along an orbit");
    c_up->add_option("--state", state_dir)->required();
    c_up->add_option("--point", point_text)->required();
    c_up->add_option("--alpha", alpha)->required();
    c_up->add_option("--beta", beta)->required();
    c_up->add_option("--horizon", horizon);

    auto* c_bishop = app.add_subcommand("bishop", "sample the upcrossing inequality");
    c_bishop->add_option("--state", state_dir)->required();
    c_bishop->add_option("--alpha", alpha)->required();
    c_bishop->add_option("--beta", beta)->required();
    c_bishop->add_option("--samples", samples);
    c_bishop->add_option("--horizon", horizon);
    c_bishop->add_option("--rng-seed", seed);

    auto* c_diag = app.add_subcommand("diagram", "render the tower diagram");
    c_diag->add_option("pt", pt_path)->required();
    c_diag->add_option("--format", format);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_check->parsed()) return cmd_check(pt_path);
        if (c_loops->parsed()) return cmd_loops(pt_path);
        if (c_thin->parsed()) return cmd_thin(pt_path, head, eps, leftover, out);
        if (c_escape->parsed()) return cmd_escape(pt_path, word_text, depth);
        if (c_even->parsed()) return cmd_evenstage(pt_path, out);
        if (c_build->parsed()) return cmd_build(seed_bit, enum_path, stages, out);
        if (c_orbit->parsed()) return cmd_orbit(state_dir, point_text, steps);
        if (c_up->parsed()) return cmd_upcross(state_dir, point_text, alpha, beta, horizon);
        if (c_bishop->parsed()) return cmd_bishop(state_dir, alpha, beta, samples, horizon, seed);
        if (c_diag->parsed()) return cmd_diagram(pt_path, format);
    } catch (const Error& e) {
        std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
