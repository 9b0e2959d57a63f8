#include "cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "relu_forge/serialize.hpp"
#include "relu_forge/verify.hpp"

namespace relu_forge::cli {

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    CertifyRequest req;
    std::optional<double> delta;
    std::string alpha;
    std::string out;
    std::string csv;
    std::string net;
    std::string n_range = "1..3";
    std::string l_range = "1..3";
    std::vector<std::string> points;
};

void add_common(CLI::App* cmd, Config& c, bool ranges) {
    cmd->add_option("--kind", c.req.kind, "builder kind")->required();
    if (!ranges) {
        cmd->add_option("--N", c.req.N, "width parameter");
        cmd->add_option("--L", c.req.L, "depth parameter");
    }
    cmd->add_option("--s", c.req.s, "smoothness order");
    cmd->add_option("--d", c.req.d, "input dimension");
    cmd->add_option("--k", c.req.k, "number of factors");
    cmd->add_option("--a", c.req.a, "interval start for product-interval");
    cmd->add_option("--b", c.req.b, "interval end for product-interval");
    cmd->add_option("--alpha", c.alpha, "multi-index, comma separated");
    cmd->add_option("--delta", c.delta, "trifling width");
    cmd->add_option("--target", c.req.target, "target preset");
    cmd->add_option("--seed", c.req.seed, "sampling seed");
}

void finish(Config& c) {
    c.req.delta = c.delta;
    c.req.alpha.clear();
    if (!c.alpha.empty()) {
        std::stringstream ss(c.alpha);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                std::size_t used = 0;
                int v = std::stoi(part, &used);
                if (used != part.size() || v < 0) throw std::invalid_argument(part);
                c.req.alpha.push_back(static_cast<unsigned>(v));
            } catch (const std::exception&) {
                throw Usage("--alpha: bad entry '" + part + "'");
            }
        }
        if (c.req.alpha.empty()) throw Usage("--alpha: empty multi-index");
    }
    try {
        c.req.validate();
    } catch (const std::invalid_argument& e) {
        throw Usage(e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

void print_size(std::ostream& out, const SizeReport& r) {
    out << "width " << r.width << ", depth " << r.depth << ", params " << r.params << ", widthvec [";
    for (std::size_t i = 0; i < r.widthvec.size(); ++i) out << (i ? "," : "") << r.widthvec[i];
    out << "]\n";
}

Network load(const std::string& path) {
    try {
        return load_network(path);
    } catch (const ParseError& e) {
        throw Usage(std::string("cannot load network: ") + e.what());
    }
}

int cmd_build(Config& c, std::ostream& out) {
    finish(c);
    auto net = build_network(c.req);
    save_network(net, c.out);
    out << "wrote " << c.out << ": ";
    print_size(out, size_report(net));
    return 0;
}

int cmd_certify(Config& c, std::ostream& out) {
    finish(c);
    std::optional<Network> net;
    if (!c.net.empty()) net = load(c.net);
    auto cert = certify(c.req, net ? &*net : nullptr);
    if (!c.out.empty()) write_file(c.out, cert.to_json() + "\n");
    if (!c.csv.empty()) write_file(c.csv, Certificate::csv_header() + "\n" + cert.csv_row() + "\n");
    out << (cert.pass ? "PASS" : "FAIL") << " " << c.req.kind << ": measured " << cert.measured << ", bound "
        << cert.bound.error << ", ";
    print_size(out, cert.size);
    if (!cert.pass && !cert.argmax.empty()) {
        out << "argmax (";
        for (std::size_t i = 0; i < cert.argmax.size(); ++i) out << (i ? ", " : "") << cert.argmax[i];
        out << ")\n";
    }
    return cert.pass ? 0 : 1;
}

int cmd_sweep(Config& c, std::ostream& out, std::ostream& err) {
    std::vector<int> Ns, Ls;
    try {
        Ns = parse_range(c.n_range);
        Ls = parse_range(c.l_range);
    } catch (const std::invalid_argument& e) {
        throw Usage(e.what());
    }
    finish(c);
    std::ostringstream csv;
    csv << Certificate::csv_header() << "\n";
    bool all = true;
    for (int N : Ns)
        for (int L : Ls) {
            Config row = c;
            row.req.N = N;
            row.req.L = L;
            try {
                row.req.validate();
                auto cert = certify(row.req);
                csv << cert.csv_row() << "\n";
                all = all && cert.pass;
            } catch (const std::exception& e) {
                err << "N=" << N << " L=" << L << ": " << e.what() << "\n";
                csv << row.req.kind << "," << row.req.s << "," << row.req.d << "," << N << "," << L
                    << ",,,,,FAIL\n";
                all = false;
            }
        }
    if (c.csv.empty())
        out << csv.str();
    else
        write_file(c.csv, csv.str());
    return all ? 0 : 1;
}

int cmd_eval(Config& c, std::ostream& out) {
    auto net = load(c.net);
    for (const auto& text : c.points) {
        std::vector<double> x;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                x.push_back(std::stod(part));
            } catch (const std::exception&) {
                throw Usage("--x: bad coordinate '" + part + "'");
            }
        }
        if (x.size() != net.input_dim())
            throw Usage("--x: expected " + std::to_string(net.input_dim()) + " coordinates, got " +
                        std::to_string(x.size()));
        auto y = evaluate(net, std::span<const double>(x));
        for (std::size_t i = 0; i < y.size(); ++i) out << (i ? "," : "") << std::setprecision(17) << y[i];
        out << "\n";
    }
    return 0;
}

} // namespace

std::vector<int> parse_range(const std::string& text) {
    std::vector<int> out;
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size()) throw std::invalid_argument("bad range '" + text + "'");
        return v;
    };
    if (auto dots = text.find(".."); dots != std::string::npos) {
        int a = to_int(text.substr(0, dots)), b = to_int(text.substr(dots + 2));
        for (int v = a; v <= b; ++v) out.push_back(v);
    } else if (!text.empty()) {
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) out.push_back(to_int(part));
    }
    if (out.empty()) throw std::invalid_argument("empty range '" + text + "'");
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constructive ReLU network builder and certifier", "relu-forge"};
    app.require_subcommand(1);
    Config c;

    auto* build = app.add_subcommand("build", "build a network and write it as JSON");
    add_common(build, c, false);
    build->add_option("-o,--out", c.out, "output network JSON")->required();

    auto* cert = app.add_subcommand("certify", "measure a network against its bound");
    add_common(cert, c, false);
    cert->add_option("--net", c.net, "certify this network file instead of building one");
    cert->add_option("--grid", c.req.grid, "points per axis");
    cert->add_option("-o,--out", c.out, "certificate JSON");
    cert->add_option("--csv", c.csv, "certificate CSV");

    auto* sweep = app.add_subcommand("sweep", "certify over ranges of N and L");
    add_common(sweep, c, true);
    sweep->add_option("--N", c.n_range, "N range, a..b or a,b,c");
    sweep->add_option("--L", c.l_range, "L range, a..b or a,b,c");
    sweep->add_option("--grid", c.req.grid, "points per axis");
    sweep->add_option("--csv", c.csv, "output CSV (stdout when omitted)");

    auto* ev = app.add_subcommand("eval", "evaluate a network file");
    ev->add_option("--net", c.net, "network JSON")->required();
    ev->add_option("--x", c.points, "input point, comma separated")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? 0 : 2;
    }
    try {
        if (*build) return cmd_build(c, out);
        if (*cert) return cmd_certify(c, out);
        if (*sweep) return cmd_sweep(c, out, err);
        return cmd_eval(c, out);
    } catch (const Usage& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace relu_forge::cli
