// Command-line driver for the dsimp toolkit.
//
// Subcommands: check, relabel, refine, metrics, closure, sweep, gen, convert,
// bench.  Exit codes: 0 ok/compatible, 1 incompatible, 2 input error,
// 3 internal guard tripped.

#include "dsimp/dsimp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace dsimp;

namespace {

Mesh read_any(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".msh") return read_msh(path);
    if (ext == ".dsimp") return read_native(path);
    throw Error("unknown input format '" + ext + "' (expected .msh or .dsimp)");
}

void write_any(const Mesh& m, const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".dsimp")
        write_native(m, path);
    else if (ext == ".vtk")
        write_vtk(m, path);
    else if (ext == ".msh")
        write_msh(m, path);
    else
        throw Error("unknown output format '" + ext + "' (expected .dsimp, .vtk or .msh)");
}

SetStrategy parse_sets(const std::string& s) {
    if (s == "ot0") return SetStrategy::OT0;
    if (s == "ile") return SetStrategy::ILE;
    if (s == "lae") return SetStrategy::LAE;
    throw Error("unknown set strategy '" + s + "'");
}

OrderStrategy parse_order(const std::string& s) {
    if (s == "srn") return OrderStrategy::SRN;
    if (s == "srn2") return OrderStrategy::SRN2;
    throw Error("unknown ordering strategy '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

AnnouncedEdges read_announcements(const Mesh& m, const fs::path& path) {
    AnnouncedEdges ann = default_announcements(m);
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open announce file '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream is(line);
        std::size_t elem;
        VertexId a, b;
        if (!(is >> elem >> a >> b))
            throw ParseError("announce file line " + std::to_string(line_no) + ": expected 'elem v_a v_b'");
        if (elem >= m.element_count())
            throw ParseError("announce file line " + std::to_string(line_no) + ": element index out of range");
        ann[elem] = make_edge(a, b);
    }
    return ann;
}

std::string csv(double x) { return format_double(x); }

void print_check_report(std::ostream& os, const WeakReport& weak, const CompatReport& rep, bool as_csv) {
    if (as_csv) {
        os << "# dsimp check csv v1\n";
        os << "weakest_ok,weak_ok,interior_faces,boundary_faces,strong,quasi_strong,weakly_only,"
              "incompatible,d1,d1_fraction\n";
        os << weak.weakest_ok << "," << weak.weakly_compatible() << "," << rep.interior_faces << ","
           << rep.boundary_faces << "," << rep.strong << "," << rep.quasi_strong << "," << rep.weakly_only
           << "," << rep.incompatible << "," << rep.d1() << "," << csv(rep.d1_fraction()) << "\n";
        return;
    }
    os << "weakest condition: " << (weak.weakest_ok ? "ok" : "FAILED") << "\n";
    if (!weak.weakest_ok) {
        os << "  " << weak.weakest_failures.size() << " incompatible interior face(s):\n";
        std::size_t shown = 0;
        for (const auto& f : weak.weakest_failures) {
            os << "    {";
            for (std::size_t i = 0; i < f.size(); ++i) os << (i ? " " : "") << f[i];
            os << "}\n";
            if (++shown == 10 && weak.weakest_failures.size() > 10) {
                os << "    ... (" << (weak.weakest_failures.size() - 10) << " more)\n";
                break;
            }
        }
    }
    os << "type-0 completion certificate: " << (weak.certificate_ok ? "ok" : "FAILED") << "\n";
    os << "weakly compatible: " << (weak.weakly_compatible() ? "yes" : "no") << "\n";
    os << "faces: interior=" << rep.interior_faces << " boundary=" << rep.boundary_faces
       << (rep.boundary_included ? " (boundary counted compatible)" : "") << "\n";
    os << "classes: strong=" << rep.strong << " quasi-strong=" << rep.quasi_strong
       << " weakly-only=" << rep.weakly_only << " incompatible=" << rep.incompatible;
    if (rep.quasi_wraparound) os << " (quasi type-wraparound pairs: " << rep.quasi_wraparound << ")";
    os << "\n";
    os << "d1 = " << rep.d1() << "  (fraction " << csv(rep.d1_fraction()) << ")\n";
}

struct SweepQuality {
    QualityReport l0, ld;
};

std::string quality_cells(const QualityReport& q) {
    std::ostringstream os;
    os << csv(q.polar_sine.min) << "," << csv(q.polar_sine.avg) << "," << csv(q.polar_sine.max) << ","
       << csv(q.v_le.avg) << "," << csv(q.v_se.avg) << "," << csv(q.v_lf.avg) << "," << csv(q.v_sf.avg)
       << "," << csv(q.f_le.avg) << "," << csv(q.f_se.avg) << "," << q.max_elements_per_vertex << ","
       << q.max_elements_per_edge;
    return os.str();
}

std::string quality_header(const std::string& suffix) {
    std::ostringstream os;
    for (const char* c : {"sine_min", "sine_avg", "sine_max", "v_le_avg", "v_se_avg", "v_lf_avg",
                          "v_sf_avg", "f_le_avg", "f_se_avg", "max_vertex_elems", "max_edge_elems"})
        os << "," << c << suffix;
    return os.str();
}

SweepQuality measure_quality(const Mesh& m) {
    SweepQuality q;
    q.l0 = quality_report(m);
    Mesh fine = m;
    uniform_refine(fine, m.dim());
    q.ld = quality_report(fine);
    return q;
}

std::string sweep_row(const Mesh& base, SetStrategy sets, long threshold, OrderStrategy order,
                      bool with_d2) {
    std::ostringstream os;
    try {
        Mesh m = base;
        std::string v0_cell;
        if (threshold < 0) {
            v0_cell = "";  // unrelabeled baseline
        } else {
            auto out = relabel_pipeline(m, sets, threshold, order);
            v0_cell = csv(double(out.v0_count) / double(m.vertex_count()));
        }
        const auto rep = distance1(m);
        const auto q = measure_quality(m);
        os << threshold << "," << v0_cell << "," << csv(rep.d1_fraction()) << "," << quality_cells(q.l0)
           << "," << quality_cells(q.ld);
        if (with_d2) {
            if (check_weak(m).weakly_compatible()) {
                const auto d2l0 = distance2(m, false, 0);
                Mesh fine = m;
                uniform_refine(fine, m.dim());
                const auto d2ld = distance2(fine, false, m.dim());
                os << "," << d2l0.d2_max << "," << csv(d2l0.d2_avg_upper) << "," << d2ld.d2_max << ","
                   << csv(d2ld.d2_avg_upper);
            } else {
                os << ",,,,";
            }
        }
        os << ",";  // empty error cell
    } catch (const std::exception& e) {
        os.str("");
        os << threshold << ",";
        for (int i = 0; i < 24 + (with_d2 ? 4 : 0); ++i) os << ",";
        std::string msg = e.what();
        for (char& c : msg)
            if (c == ',' || c == '\n') c = ';';
        os << msg;
    }
    return os.str();
}

int fitted_exponent_info(const std::vector<std::pair<std::size_t, double>>& samples, double& slope) {
    // least squares on log-log
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(samples.size());
    for (auto& [elems, secs] : samples) {
        const double x = std::log(double(elems)), y = std::log(secs);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return 0;
}

double time_pipeline(const Mesh& base, SetStrategy sets, long threshold, OrderStrategy order) {
    // neighbor search + initial compatibility check + partition/order/apply +
    // final compatibility measure, matching the measured pipeline
    const auto t0 = std::chrono::steady_clock::now();
    Mesh m = base;
    auto faces = face_incidences(m);
    (void)faces;
    (void)check_weakest(m);
    (void)relabel_pipeline(m, sets, threshold, order);
    (void)distance1(m);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dsimp: newest-vertex-bisection refinement toolkit for simplicial meshes"};
    app.require_subcommand(1);
    int exit_code = 0;

    // --- check ---------------------------------------------------------------
    std::string check_mesh;
    bool check_boundary = false, check_csv = false;
    auto* cmd_check = app.add_subcommand("check", "compatibility report for a mesh");
    cmd_check->add_option("mesh", check_mesh, "input mesh (.msh or .dsimp)")->required();
    cmd_check->add_flag("--boundary", check_boundary, "include boundary faces (counted compatible)");
    cmd_check->add_flag("--csv", check_csv, "emit CSV instead of text");
    cmd_check->callback([&] {
        const Mesh m = read_any(check_mesh);
        const auto weak = check_weak(m);
        const auto rep = distance1(m, check_boundary);
        print_check_report(std::cout, weak, rep, check_csv);
        exit_code = weak.weakly_compatible() ? 0 : 1;
    });

    // --- relabel -------------------------------------------------------------
    std::string rl_mesh, rl_out, rl_sets = "ot0", rl_order = "srn", rl_announce;
    long rl_threshold = 0;
    auto* cmd_relabel = app.add_subcommand("relabel", "reorder vertices for weak compatibility");
    cmd_relabel->add_option("mesh", rl_mesh)->required();
    cmd_relabel->add_option("-o,--output", rl_out, "output mesh")->required();
    cmd_relabel->add_option("--sets", rl_sets, "vertex set strategy: ot0|ile|lae");
    cmd_relabel->add_option("--threshold", rl_threshold, "strategy threshold (ile/lae)");
    cmd_relabel->add_option("--order", rl_order, "ordering strategy: srn|srn2");
    cmd_relabel->add_option("--announce", rl_announce, "announced edges file: lines 'elem v_a v_b'");
    cmd_relabel->callback([&] {
        Mesh m = read_any(rl_mesh);
        std::optional<AnnouncedEdges> ann;
        if (!rl_announce.empty()) ann = read_announcements(m, rl_announce);
        const auto out = relabel_pipeline(m, parse_sets(rl_sets), rl_threshold, parse_order(rl_order), ann);
        write_any(m, rl_out);
        std::cout << "relabeled " << m.element_count() << " elements; |V0|=" << out.v0_count
                  << " |V1|=" << out.v1_count << " demoted=" << out.demoted << "\n";
        if (!out.labeling.degenerate_elements.empty())
            std::cout << "warning: " << out.labeling.degenerate_elements.size()
                      << " degenerate element(s) after labeling\n";
    });

    // --- refine --------------------------------------------------------------
    std::string rf_mesh, rf_out, rf_mark_file;
    int rf_uniform = -1;
    double rf_p = -1;
    std::uint64_t rf_seed = 0;
    auto* cmd_refine = app.add_subcommand("refine", "uniform or marked refinement with closure");
    cmd_refine->add_option("mesh", rf_mesh)->required();
    cmd_refine->add_option("-o,--output", rf_out)->required();
    cmd_refine->add_option("--uniform", rf_uniform, "number of uniform bisection passes");
    cmd_refine->add_option("--mark", rf_mark_file, "file with one element index per line");
    cmd_refine->add_option("--mark-random", rf_p, "mark each element with this probability");
    cmd_refine->add_option("--seed", rf_seed, "seed for --mark-random (mt19937_64)");
    cmd_refine->callback([&] {
        Mesh m = read_any(rf_mesh);
        if (rf_uniform >= 0) {
            uniform_refine(m, rf_uniform);
            std::cout << "uniformly refined " << rf_uniform << "x -> " << m.element_count()
                      << " elements (conforming: " << (is_conforming(m) ? "yes" : "no") << ")\n";
        } else {
            std::vector<std::size_t> marks;
            if (!rf_mark_file.empty()) {
                std::ifstream in(rf_mark_file);
                if (!in) throw IoFailure("cannot open mark file '" + rf_mark_file + "'");
                std::size_t idx;
                while (in >> idx) marks.push_back(idx);
            } else if (rf_p >= 0) {
                std::mt19937_64 rng(rf_seed);
                std::bernoulli_distribution coin(rf_p);
                for (std::size_t i = 0; i < m.element_count(); ++i)
                    if (coin(rng)) marks.push_back(i);
            } else {
                throw Error("refine needs one of --uniform, --mark, --mark-random");
            }
            const auto res = refine_closure(m, marks);
            std::cout << "marked " << marks.size() << ", closure performed " << res.bisections
                      << " bisections in " << res.passes << " passes -> " << m.element_count()
                      << " elements\n";
        }
        write_any(m, rf_out);
    });

    // --- metrics -------------------------------------------------------------
    std::string mt_mesh;
    int mt_refine = 0;
    bool mt_csv = false;
    auto* cmd_metrics = app.add_subcommand("metrics", "geometric quality report");
    cmd_metrics->add_option("mesh", mt_mesh)->required();
    cmd_metrics->add_option("--refine-uniform", mt_refine, "refine uniformly k times before measuring");
    cmd_metrics->add_flag("--csv", mt_csv);
    cmd_metrics->callback([&] {
        Mesh m = read_any(mt_mesh);
        uniform_refine(m, mt_refine);
        const auto q = quality_report(m);
        if (mt_csv) {
            std::cout << "# dsimp metrics csv v1\n";
            std::cout << "elements" << quality_header("") << "\n";
            std::cout << m.element_count() << "," << quality_cells(q) << "\n";
            return;
        }
        auto line = [&](const char* name, const QualityStats& s) {
            std::cout << "  " << name << ": min=" << csv(s.min) << " avg=" << csv(s.avg)
                      << " max=" << csv(s.max) << "\n";
        };
        std::cout << "elements: " << m.element_count() << "\n";
        line("polar sine    ", q.polar_sine);
        line("V/LE^d        ", q.v_le);
        line("V/SE^d        ", q.v_se);
        line("V/LF^(d/(d-1))", q.v_lf);
        line("V/SF^(d/(d-1))", q.v_sf);
        line("F/LE^(d-1)    ", q.f_le);
        line("F/SE^(d-1)    ", q.f_se);
        std::cout << "  max elements per vertex: " << q.max_elements_per_vertex << "\n";
        std::cout << "  max elements per edge:   " << q.max_elements_per_edge << "\n";
    });

    // --- closure -------------------------------------------------------------
    std::string cl_mesh;
    int cl_level = 0;
    bool cl_exact = false;
    auto* cmd_closure = app.add_subcommand("closure", "per-element conforming-closure cost (d2)");
    cmd_closure->add_option("mesh", cl_mesh)->required();
    cmd_closure->add_option("--level", cl_level, "uniform refinements before measuring (0 or d)");
    cmd_closure->add_flag("--exact-average", cl_exact, "compute the exact average (no subsumption)");
    cmd_closure->callback([&] {
        Mesh m = read_any(cl_mesh);
        uniform_refine(m, cl_level);
        const auto rep = distance2(m, cl_exact, cl_level);
        std::cout << "level " << rep.level << ": d2_max=" << rep.d2_max
                  << (rep.exact_average ? " d2_avg=" : " d2_avg_upper=") << csv(rep.d2_avg_upper)
                  << "  (" << m.element_count() << " elements)\n";
    });

    // --- sweep ---------------------------------------------------------------
    std::string sw_mesh, sw_out, sw_sets = "ile,lae", sw_order = "srn,srn2", sw_range = "0..35";
    bool sw_d2 = false;
    unsigned sw_jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* cmd_sweep = app.add_subcommand("sweep", "threshold study producing one CSV per cell");
    cmd_sweep->add_option("mesh", sw_mesh)->required();
    cmd_sweep->add_option("--out", sw_out, "output directory")->required();
    cmd_sweep->add_option("--sets", sw_sets, "comma list of ile,lae");
    cmd_sweep->add_option("--order", sw_order, "comma list of srn,srn2");
    cmd_sweep->add_option("--thresholds", sw_range, "threshold range a..b");
    cmd_sweep->add_flag("--with-d2", sw_d2, "also compute closure distances (quadratic cost)");
    cmd_sweep->add_option("--jobs", sw_jobs, "parallel worker count");
    cmd_sweep->callback([&] {
        const Mesh base = read_any(sw_mesh);
        const auto dot = sw_range.find("..");
        if (dot == std::string::npos) throw Error("--thresholds expects a..b");
        const long lo = std::stol(sw_range.substr(0, dot));
        const long hi = std::stol(sw_range.substr(dot + 2));
        if (hi < lo) throw Error("--thresholds range is empty");
        fs::create_directories(sw_out);
        const std::string stem = fs::path(sw_mesh).stem().string();
        for (const auto& sets_name : split_list(sw_sets)) {
            const SetStrategy sets = parse_sets(sets_name);
            for (const auto& order_name : split_list(sw_order)) {
                const OrderStrategy order = parse_order(order_name);
                // rows computed by a bounded worker pool, written in order
                std::vector<long> thresholds{-1};
                for (long t = lo; t <= hi; ++t) thresholds.push_back(t);
                std::vector<std::string> rows(thresholds.size());
                std::size_t next = 0;
                while (next < thresholds.size()) {
                    const std::size_t batch = std::min<std::size_t>(sw_jobs, thresholds.size() - next);
                    std::vector<std::future<std::string>> futs;
                    for (std::size_t k = 0; k < batch; ++k)
                        futs.push_back(std::async(std::launch::async, sweep_row, std::cref(base), sets,
                                                  thresholds[next + k], order, sw_d2));
                    for (std::size_t k = 0; k < batch; ++k) rows[next + k] = futs[k].get();
                    next += batch;
                }
                const fs::path file = fs::path(sw_out) / (stem + "." + sets_name + "-" + order_name + ".csv");
                std::ofstream os(file);
                if (!os) throw IoFailure("cannot open '" + file.string() + "'");
                os << "# dsimp sweep csv v1\n";
                os << "threshold,v0_fraction,d1_fraction" << quality_header("_l0") << quality_header("_ld");
                if (sw_d2) os << ",d2_max_l0,d2_avg_upper_l0,d2_max_ld,d2_avg_upper_ld";
                os << ",error\n";
                for (const auto& r : rows) os << r << "\n";
                std::cout << "wrote " << file.string() << "\n";
            }
        }
    });

    // --- gen -----------------------------------------------------------------
    std::string gen_kind, gen_out;
    int gen_dim = 3, gen_cells = 1;
    auto* cmd_gen = app.add_subcommand("gen", "generate a test mesh");
    cmd_gen->add_option("kind", gen_kind, "mesh family (kuhn)")->required();
    cmd_gen->add_option("--dim", gen_dim, "mesh dimension");
    cmd_gen->add_option("--cells", gen_cells, "cells per axis");
    cmd_gen->add_option("-o,--output", gen_out)->required();
    cmd_gen->callback([&] {
        if (gen_kind != "kuhn") throw Error("unknown generator '" + gen_kind + "' (supported: kuhn)");
        const Mesh m = generate_kuhn_grid(gen_dim, gen_cells);
        write_any(m, gen_out);
        std::cout << "generated " << m.element_count() << " elements, " << m.vertex_count()
                  << " vertices\n";
    });

    // --- convert ---------------------------------------------------------------
    std::string cv_in, cv_out;
    auto* cmd_convert = app.add_subcommand("convert", "convert between .msh, .dsimp and .vtk");
    cmd_convert->add_option("input", cv_in)->required();
    cmd_convert->add_option("output", cv_out)->required();
    cmd_convert->callback([&] { write_any(read_any(cv_in), cv_out); });

    // --- bench -----------------------------------------------------------------
    std::string bn_sizes = "1,2,4,8,16", bn_sets = "ile", bn_order = "srn2";
    long bn_threshold = 0;
    auto* cmd_bench = app.add_subcommand("bench", "relabel-pipeline runtime over Kuhn grid sizes");
    cmd_bench->add_option("--sizes", bn_sizes, "comma list of cells-per-axis values");
    cmd_bench->add_option("--sets", bn_sets);
    cmd_bench->add_option("--threshold", bn_threshold);
    cmd_bench->add_option("--order", bn_order);
    cmd_bench->callback([&] {
        const SetStrategy sets = parse_sets(bn_sets);
        const OrderStrategy order = parse_order(bn_order);
        std::vector<std::pair<std::size_t, double>> samples;
        std::cout << "# dsimp bench csv v1\nn,seconds\n";
        for (const auto& tok : split_list(bn_sizes)) {
            const int cells = std::stoi(tok);
            const Mesh base = generate_kuhn_grid(3, cells);
            double best = std::numeric_limits<double>::infinity();
            double spent = 0;
            int reps = 0;
            while ((spent < 0.05 && reps < 25) || reps < 3) {
                const double t = time_pipeline(base, sets, bn_threshold, order);
                best = std::min(best, t);
                spent += t;
                ++reps;
            }
            samples.emplace_back(base.element_count(), best);
            std::cout << base.element_count() << "," << csv(best) << "\n";
        }
        if (samples.size() >= 2) {
            double slope = 0;
            fitted_exponent_info(samples, slope);
            std::cout << "# fitted growth exponent: " << csv(slope) << "\n";
            const auto& [n_last, t_last] = samples.back();
            const double est = t_last * (1e6 / double(n_last)) *
                               std::log(1e6) / std::log(double(n_last));
            std::cout << "# estimated n log n time for 1e6 elements: ~" << csv(est) << " s\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NonTermination& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
