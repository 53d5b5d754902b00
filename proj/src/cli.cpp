#include "ricci/cli.hpp"

#include "ricci/curvature.hpp"
#include "ricci/models.hpp"
#include "ricci/transport.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace ricci::cli {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Model specs

namespace {

class SpecParser {
public:
    explicit SpecParser(const std::string& s) : s_(s) {}

    ParsedModel parse() {
        ParsedModel m = model(true);
        skip_space();
        if (pos_ != s_.size()) {
            fail("unexpected trailing input");
        }
        return m;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("model spec '" + s_ + "': " + what + " at position " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= s_.size() || s_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    std::string word() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return s_.substr(start, pos_ - start);
    }

    int integer() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_ || pos_ - start > 6) {
            fail("expected a small nonnegative integer");
        }
        return std::stoi(s_.substr(start, pos_ - start));
    }

    ParsedModel model(bool top) {
        const std::string name = word();
        ParsedModel m;
        try {
            if (name == "bl") {
                expect('(');
                m.n = integer();
                expect(',');
                m.k = integer();
                expect(')');
                m.kind = ModelKind::BernoulliLaplace;
                m.triple = bernoulli_laplace(m.n, m.k).triple;
            } else if (name == "rt") {
                expect('(');
                m.n = integer();
                expect(')');
                m.kind = ModelKind::RandomTransposition;
                m.triple = random_transposition(m.n).triple;
            } else if (name == "complete") {
                expect('(');
                m.n = integer();
                expect(')');
                m.kind = ModelKind::Complete;
                m.triple = complete_graph(m.n);
            } else if (name == "product") {
                expect('(');
                ParsedModel a = model(false);
                expect(',');
                ParsedModel b = model(false);
                expect(')');
                m.kind = ModelKind::Product;
                m.triple = product_chain(a.triple, b.triple);
            } else if (name == "file") {
                expect(':');
                const std::size_t start = pos_;
                if (top) {
                    pos_ = s_.size();
                } else {
                    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')') ++pos_;
                }
                std::string path = s_.substr(start, pos_ - start);
                while (!path.empty() && std::isspace(static_cast<unsigned char>(path.back()))) path.pop_back();
                if (path.empty()) {
                    fail("empty file path");
                }
                m.kind = ModelKind::File;
                m.triple = read_chain(path);
            } else {
                fail(name.empty() ? "expected a model name" : "unknown model '" + name + "'");
            }
        } catch (const std::out_of_range& e) {
            throw InputError(e.what());
        }
        return m;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MarkovTriple assemble(const std::vector<std::string>& labels, const std::map<std::string, double>& weights,
                      const std::vector<std::tuple<std::string, std::string, double>>& entries) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        index[labels[i]] = static_cast<int>(i);
    }
    std::vector<double> w;
    for (const auto& l : labels) {
        auto it = weights.find(l);
        if (it == weights.end()) {
            throw InputError("chain file: state '" + l + "' has no pi entry");
        }
        w.push_back(it->second);
    }
    std::vector<RateEntry> rates;
    for (const auto& [from, to, rate] : entries) {
        rates.push_back({index.at(from), index.at(to), rate});
    }
    try {
        return build_triple(labels, std::move(rates), std::move(w));
    } catch (const TripleValidationError& e) {
        std::string msg = "chain file: invalid triple:";
        for (const Violation& v : e.violations()) {
            msg += std::string(" [") + to_string(v.kind) + "] " + v.message + ";";
        }
        throw InputError(msg);
    }
}

}  // namespace

ParsedModel parse_model(const std::string& spec) { return SpecParser(spec).parse(); }

MarkovTriple parse_chain_text(std::istream& in) {
    std::vector<std::string> labels;
    std::map<std::string, double> weights;
    std::vector<std::tuple<std::string, std::string, double>> entries;
    std::map<std::string, bool> seen;
    auto note = [&](const std::string& l) {
        if (!seen[l]) {
            seen[l] = true;
            labels.push_back(l);
        }
    };
    auto number = [](const std::string& tok, int line) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) {
            throw InputError("chain file line " + std::to_string(line) + ": bad number '" + tok + "'");
        }
        return v;
    };

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string s; ls >> s;) tok.push_back(s);
        if (tok.empty()) {
            continue;
        }
        if (tok.size() != 3) {
            throw InputError("chain file line " + std::to_string(line) + ": expected three fields");
        }
        if (tok[0] == "pi") {
            if (weights.count(tok[1])) {
                throw InputError("chain file line " + std::to_string(line) + ": repeated pi entry");
            }
            note(tok[1]);
            weights[tok[1]] = number(tok[2], line);
        } else {
            note(tok[0]);
            note(tok[1]);
            entries.emplace_back(tok[0], tok[1], number(tok[2], line));
        }
    }
    if (labels.empty()) {
        throw InputError("chain file: no states");
    }
    return assemble(labels, weights, entries);
}

MarkovTriple parse_chain_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        std::vector<std::string> labels = j.at("states").get<std::vector<std::string>>();
        std::map<std::string, double> weights;
        for (const auto& [k, v] : j.at("weights").items()) {
            weights[k] = v.get<double>();
        }
        std::vector<std::tuple<std::string, std::string, double>> entries;
        std::map<std::string, bool> known;
        for (const auto& l : labels) known[l] = true;
        for (const auto& r : j.at("rates")) {
            auto from = r.at("from").get<std::string>();
            auto to = r.at("to").get<std::string>();
            if (!known.count(from) || !known.count(to)) {
                throw InputError("chain file: rate refers to an unknown state");
            }
            entries.emplace_back(std::move(from), std::move(to), r.at("rate").get<double>());
        }
        return assemble(labels, weights, entries);
    } catch (const json::exception& e) {
        throw InputError(std::string("chain file: ") + e.what());
    }
}

MarkovTriple read_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open chain file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    const bool is_json = (path.size() > 5 && path.substr(path.size() - 5) == ".json") ||
                         (first != std::string::npos && text[first] == '{');
    if (is_json) {
        return parse_chain_json(text);
    }
    std::istringstream is(text);
    return parse_chain_text(is);
}

void write_chain_text(std::ostream& out, const MarkovTriple& t) {
    out << "# states: " << t.size() << "\n";
    for (std::size_t x = 0; x < t.size(); ++x) {
        out << "pi " << t.labels()[x] << " " << fmt17(t.weight(static_cast<int>(x))) << "\n";
    }
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        out << t.labels()[static_cast<std::size_t>(t.arc_source(i))] << " "
            << t.labels()[static_cast<std::size_t>(t.arc(i).to)] << " " << fmt17(t.arc(i).rate) << "\n";
    }
}

void write_chain_json(std::ostream& out, const MarkovTriple& t) {
    json j;
    j["states"] = t.labels();
    json rates = json::array();
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        rates.push_back({{"from", t.labels()[static_cast<std::size_t>(t.arc_source(i))]},
                         {"to", t.labels()[static_cast<std::size_t>(t.arc(i).to)]},
                         {"rate", t.arc(i).rate}});
    }
    j["rates"] = rates;
    json w = json::object();
    for (std::size_t x = 0; x < t.size(); ++x) {
        w[t.labels()[x]] = t.weight(static_cast<int>(x));
    }
    j["weights"] = w;
    out << j.dump(2) << "\n";
}

std::optional<Certificate> certificate_for(const ParsedModel& m) {
    switch (m.kind) {
        case ModelKind::BernoulliLaplace:
            return certify_bl(m.n, m.k);
        case ModelKind::RandomTransposition:
            return certify_rt(m.n);
        default:
            try {
                return certify_generic(m.triple);
            } catch (const CertificationError&) {
                return std::nullopt;
            }
    }
}

// ---------------------------------------------------------------------------
// Output

namespace {

// Doubles are stored already rounded to 9 significant digits.
json num(double v) {
    if (!std::isfinite(v)) {
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::strtod(buf, nullptr) + 0.0;  // no negative zero
}

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v.get<double>());
        return buf;
    }
    if (v.is_null()) return "-";
    return v.dump();
}

void render_text(const json& j, std::ostream& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (const auto& [key, v] : j.items()) {
        if (v.is_object()) {
            out << pad << key << ":\n";
            render_text(v, out, indent + 2);
        } else if (v.is_array() && !v.empty() && v.front().is_object()) {
            out << pad << key << ":\n";
            std::vector<std::string> cols;
            for (const auto& [c, _] : v.front().items()) cols.push_back(c);
            std::vector<std::vector<std::string>> rows{cols};
            for (const auto& row : v) {
                std::vector<std::string> r;
                for (const auto& c : cols) r.push_back(row.contains(c) ? scalar_text(row[c]) : "-");
                rows.push_back(r);
            }
            std::vector<std::size_t> width(cols.size(), 0);
            for (const auto& r : rows)
                for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
            for (const auto& r : rows) {
                out << pad << "  ";
                for (std::size_t i = 0; i < r.size(); ++i) {
                    if (i + 1 < r.size()) {
                        out << std::left << std::setw(static_cast<int>(width[i])) << r[i] << "  ";
                    } else {
                        out << r[i];
                    }
                }
                out << "\n";
            }
        } else if (v.is_array()) {
            out << pad << key << ": ";
            for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << scalar_text(v[i]);
            out << "\n";
        } else {
            out << pad << key << ": " << scalar_text(v) << "\n";
        }
    }
}

struct Globals {
    std::string format = "text";
    std::uint64_t seed = 0;
};

void emit(const json& doc, const Globals& g, std::ostream& out) {
    if (g.format == "json") {
        out << doc.dump(2) << "\n";
    } else {
        render_text(doc, out, 0);
    }
}

json header(const std::string& command, const Globals& g) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = g.seed;
    return j;
}

json certificate_json(const Certificate& c) {
    json j;
    j["model"] = c.model;
    j["kappa"] = c.kappa.str();
    j["kappa_value"] = num(c.kappa.to_double());
    j["breakdown"] = {{"on_diagonal", c.on_diagonal.str()},
                      {"triangles", c.triangles.str()},
                      {"squares", c.squares.str()}};
    j["degree"] = c.degree;
    j["rate"] = c.rate.str();
    j["triangles_per_edge"] = c.triangles_per_edge;
    j["enumerated"] = c.enumerated;
    json facts = json::array();
    for (const auto& f : c.facts) {
        facts.push_back({{"fact", f.name},
                         {"holds", f.holds},
                         {"role", f.required ? "used" : "informational"},
                         {"detail", f.detail}});
    }
    j["facts"] = facts;
    return j;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size() || tok.empty()) {
            throw InputError(std::string("bad number in ") + what + ": '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

Eigen::VectorXd random_density(const MarkovTriple& t, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(t.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::exp(normal(rng));
    return Density::normalized(t, v).values();
}

Eigen::VectorXd endpoint(const MarkovTriple& t, const std::string& given, std::mt19937_64& rng, const char* what) {
    if (given.empty()) {
        return random_density(t, rng);
    }
    const auto vals = parse_list(given, what);
    if (vals.size() != t.size()) {
        throw InputError(std::string(what) + ": expected " + std::to_string(t.size()) + " values");
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    if (!(v.minCoeff() > 0.0)) {
        throw InputError(std::string(what) + ": values must be strictly positive");
    }
    return Density::normalized(t, v).values();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_info(const ParsedModel& m, const std::string& export_path, const Globals& g, std::ostream& out) {
    const MarkovTriple& t = m.triple;
    if (!export_path.empty()) {
        std::ofstream f(export_path);
        if (!f) {
            throw InputError("cannot write '" + export_path + "'");
        }
        if (export_path.size() > 5 && export_path.substr(export_path.size() - 5) == ".json") {
            write_chain_json(f, t);
        } else {
            write_chain_text(f, t);
        }
    }
    const RegularStructure rs = regular_structure(t);
    std::size_t dmin = t.size(), dmax = 0;
    for (std::size_t x = 0; x < t.size(); ++x) {
        dmin = std::min(dmin, t.degree(static_cast<int>(x)));
        dmax = std::max(dmax, t.degree(static_cast<int>(x)));
    }
    json doc = header("info", g);
    doc["states"] = t.size();
    doc["edges"] = t.edges().size();
    doc["degree_min"] = dmin;
    doc["degree_max"] = dmax;
    doc["regular"] = rs.regular;
    doc["uniform_weights"] = rs.uniform_weights;
    doc["uniform_rate"] = rs.uniform_rate;
    if (rs.uniform_rate) {
        doc["rate"] = num(rs.rate);
    }
    doc["triangles"] = enumerate_triangles(t).size();
    doc["squares"] = enumerate_squares(t).size();
    doc["chordless_squares"] = enumerate_chordless_squares(t).size();
    emit(doc, g, out);
    return 0;
}

int cmd_certify(const ParsedModel& m, const Globals& g, std::ostream& out, std::ostream& err) {
    std::optional<Certificate> c;
    try {
        switch (m.kind) {
            case ModelKind::BernoulliLaplace: c = certify_bl(m.n, m.k); break;
            case ModelKind::RandomTransposition: c = certify_rt(m.n); break;
            default: c = certify_generic(m.triple); break;
        }
    } catch (const CertificationError& e) {
        json doc = header("certify", g);
        doc["certified"] = false;
        doc["reason"] = e.what();
        emit(doc, g, out);
        err << "certify: " << e.what() << "\n";
        return 1;
    }
    json doc = header("certify", g);
    doc["certified"] = true;
    doc.update(certificate_json(*c));
    emit(doc, g, out);
    return 0;
}

int cmd_estimate(const ParsedModel& m, const EstimateOptions& eo, const Globals& g, std::ostream& out) {
    EstimateOptions o = eo;
    o.seed = g.seed;
    KappaEstimate e;
    try {
        e = estimate_kappa(m.triple, o);
    } catch (const std::length_error& ex) {
        throw InputError(ex.what());
    }
    json doc = header("estimate", g);
    doc["kappa_estimate"] = num(e.kappa);
    doc["note"] = "upper bound on kappa from a local search; not a certificate";
    doc["lambda"] = num(spectral_gap(m.triple));
    doc["starts"] = o.starts;
    doc["best_start"] = e.best_start;
    doc["iterations"] = e.iterations;
    doc["gradient_norm"] = num(e.gradient_norm);
    doc["converged"] = e.converged;
    json sv = json::array();
    for (double v : e.start_values) sv.push_back(num(v));
    doc["start_values"] = sv;
    doc["witness"] = {{"rho", vec(e.rho)}, {"psi", vec(e.psi)}};
    if (!e.diagnostics.empty()) {
        doc["diagnostics"] = e.diagnostics;
    }
    emit(doc, g, out);
    return 0;
}

int cmd_gap(const ParsedModel& m, const Globals& g, std::ostream& out) {
    json doc = header("gap", g);
    doc["spectral_gap"] = num(spectral_gap(m.triple));
    emit(doc, g, out);
    return 0;
}

int cmd_inequalities(const ParsedModel& m, const ReportOptions& ro, const Globals& g, std::ostream& out) {
    ReportOptions o = ro;
    o.seed = g.seed;
    const auto cert = certificate_for(m);
    const CurvatureReport rep = inequality_report(m.triple, cert, o);
    json doc = header("inequalities", g);
    doc["kappa_certified"] = rep.kappa_certified ? json(rep.kappa_certified->str()) : json(nullptr);
    if (rep.kappa_estimate) {
        doc["kappa_estimate"] = num(rep.kappa_estimate->kappa);
    }
    doc["lambda"] = num(rep.lambda);
    doc["alpha_interval"] = {{"lower", rep.alpha_lower ? json(rep.alpha_lower->str()) : json(nullptr)},
                             {"upper", num(rep.alpha_upper)}};
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back(
            {{"check", c.name}, {"samples", c.samples}, {"worst_slack", num(c.worst_slack)}, {"passed", c.passed}});
    }
    doc["checks"] = checks;
    json prov;
    for (const auto& [k, v] : rep.provenance) prov[k] = v;
    doc["provenance"] = prov;
    doc["passed"] = rep.passed();
    emit(doc, g, out);
    return rep.passed() ? 0 : 1;
}

struct TransportArgs {
    std::string from;
    std::string to;
    std::string kappa;
    TransportOptions options;
};

int cmd_transport(const ParsedModel& m, const TransportArgs& a, const Globals& g, std::ostream& out) {
    const MarkovTriple& t = m.triple;
    std::mt19937_64 rng(g.seed);
    const Eigen::VectorXd rho0 = endpoint(t, a.from, rng, "--from");
    const Eigen::VectorXd rho1 = endpoint(t, a.to, rng, "--to");
    TransportResult r;
    try {
        r = distance_upper(t, rho0, rho1, a.options);
    } catch (const std::length_error& e) {
        throw InputError(e.what());
    }
    json doc = header("transport", g);
    doc["note"] = "W values are upper bounds from a discretised action";
    doc["rho0"] = vec(rho0);
    doc["rho1"] = vec(rho1);
    doc["w_upper"] = num(r.w_upper);
    json levels = json::array();
    for (const auto& l : r.levels) {
        levels.push_back({{"steps", l.steps},
                          {"w_upper", num(l.w_upper)},
                          {"iterations", l.iterations},
                          {"converged", l.converged},
                          {"midpoint_residual", num(l.midpoint_residual)}});
    }
    doc["levels"] = levels;
    doc["scheme_residual"] = num(r.scheme_residual);

    int code = 0;
    if (!a.kappa.empty()) {
        double kappa = 0;
        std::string source;
        if (a.kappa == "auto") {
            const auto cert = certificate_for(m);
            if (!cert) {
                throw InputError("--kappa auto: no certificate for this model");
            }
            kappa = cert->kappa.to_double();
            source = "certificate " + cert->kappa.str();
        } else {
            const auto v = parse_list(a.kappa, "--kappa");
            if (v.size() != 1) throw InputError("--kappa: expected one value");
            kappa = v.front();
            source = "given";
        }
        const ConvexityReport c = convexity_check(t, r, kappa);
        doc["convexity"] = {{"kappa", num(kappa)},
                            {"kappa_source", source},
                            {"entropy_start", num(c.h0)},
                            {"entropy_end", num(c.h1)},
                            {"worst_slack", num(c.worst_slack)},
                            {"tolerance", num(c.tolerance)},
                            {"consistent", c.consistent}};
        code = c.consistent ? 0 : 1;
    }
    emit(doc, g, out);
    return code;
}

int cmd_counterexample(const std::string& eps_list, const Globals& g, std::ostream& out) {
    const auto eps = parse_list(eps_list, "--eps");
    std::vector<CounterexampleRow> rows;
    for (double e : eps) {
        try {
            rows.push_back(s3_counterexample(e));
        } catch (const std::out_of_range& ex) {
            throw InputError(ex.what());
        }
    }
    json doc = header("counterexample", g);
    json table = json::array();
    bool nonneg = true, positive = true, decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        table.push_back({{"eps", num(r.eps)}, {"A", num(r.a)}, {"B_off", num(r.b_off)}, {"ratio", num(r.ratio)}});
        nonneg = nonneg && r.b_off >= -1e-12;
        positive = positive && r.a > 0;
        if (i > 0) {
            decreasing = decreasing && (rows[i - 1].eps > r.eps ? r.ratio < rows[i - 1].ratio : true);
        }
    }
    doc["rows"] = table;
    doc["checks"] = json::array({{{"check", "b_off-nonnegative"}, {"passed", nonneg}},
                                 {{"check", "a-positive"}, {"passed", positive}},
                                 {{"check", "ratio-decreasing-in-eps"}, {"passed", decreasing}}});
    emit(doc, g, out);
    return nonneg && positive && decreasing ? 0 : 1;
}

struct CheckRow {
    std::string name;
    int samples = 0;
    double worst = 0.0;  // worst scaled violation; <= 0 passes
    bool passed = true;
};

int cmd_verify(const ParsedModel& m, int samples, const Globals& g, std::ostream& out) {
    const MarkovTriple& t = m.triple;
    const auto n = static_cast<Eigen::Index>(t.size());
    std::mt19937_64 rng(g.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto rvec = [&](Eigen::Index size) {
        Eigen::VectorXd v(size);
        for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
        return v;
    };
    auto rrho = [&]() { return Eigen::VectorXd(rvec(n).array().exp()); };

    std::vector<CheckRow> rows;
    auto record = [&](const std::string& name, int count, double worst, double tol) {
        rows.push_back({name, count, worst, worst <= tol});
    };

    {
        double worst = 0.0;
        for (std::size_t i = 0; i < t.arc_count(); ++i) {
            const int x = t.arc_source(i);
            const int y = t.arc(i).to;
            const double fwd = t.weight(x) * t.arc(i).rate;
            const double back = t.weight(y) * t.rate(y, x);
            worst = std::max(worst, std::abs(fwd - back) / std::max(fwd, back));
        }
        record("detailed-balance", static_cast<int>(t.arc_count()), worst, 1e-12);
    }
    double sa = 0, ibp = 0, divgrad = 0, aedge = 0, bedge = 0;
    for (int i = 0; i < samples; ++i) {
        const Potential f = rvec(n), h = rvec(n);
        const double lhs = inner(t, generator_apply(t, f), h), rhs = inner(t, f, generator_apply(t, h));
        sa = std::max(sa, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        const EdgeFunction psi{rvec(static_cast<Eigen::Index>(t.arc_count()))};
        const double a = inner(t, gradient(t, f), psi), b = -inner(t, f, divergence(t, psi));
        ibp = std::max(ibp, std::abs(a - b) / std::max(1.0, std::abs(a)));
        const Potential d = divergence(t, gradient(t, f)) - generator_apply(t, f);
        divgrad = std::max(divgrad, d.lpNorm<Eigen::Infinity>() / std::max(1.0, generator_apply(t, f).lpNorm<Eigen::Infinity>()));
        const Eigen::VectorXd rho = rrho();
        const double af = a_form(t, rho, f);
        aedge = std::max(aedge, std::abs(af - a_edge_sum(t, rho, f)) / std::max(1e-300, std::abs(af)));
        double sum = 0;
        for (const auto& term : b_edge_terms(t, rho, f)) sum += term.value;
        const double bd = b_form_direct(t, rho, f);
        bedge = std::max(bedge, std::abs(sum - bd) / std::max({1e-300, std::abs(bd), af}));
    }
    record("generator-self-adjoint", samples, sa, 1e-12);
    record("integration-by-parts", samples, ibp, 1e-12);
    record("divergence-of-gradient", samples, divgrad, 1e-12);
    record("a-edge-sum", samples, aedge, 1e-10);
    record("b-edge-sum", samples, bedge, 1e-10);

    const auto cert = certificate_for(m);
    const RegularStructure rs = regular_structure(t);
    if (cert) {
        const double kappa = cert->kappa.to_double();
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < samples; ++i) {
            const Eigen::VectorXd rho = rrho();
            const Potential f = rvec(n);
            const double a = a_form(t, rho, f), b = b_form_direct(t, rho, f);
            worst = std::max(worst, (kappa * a - b) / std::max(1.0, a));
        }
        record("certificate-bound", samples, worst, 1e-10);
    }
    if (rs.simple_random_walk()) {
        const double q = rs.rate;
        const auto tris = enumerate_triangles(t);
        const auto sqs = enumerate_squares(t);
        double on = -std::numeric_limits<double>::infinity(), tri = on, sq_id = 0, sq_neg = on;
        for (int i = 0; i < samples; ++i) {
            const Eigen::VectorXd rho = rrho();
            const Potential f = rvec(n);
            const FormValue fv = b_decomposition(t, rho, f);
            on = std::max(on, (2 * q * fv.a - fv.b_on) / std::max(1.0, fv.a));
            if (!tris.empty()) {
                const auto& g3 = tris[static_cast<std::size_t>(i) % tris.size()];
                const double a3 = a_subgraph(t, g3, rho, f);
                tri = std::max(tri, (0.5 * q * a3 - b_subgraph(t, g3, rho, f, FormPart::Off)) / std::max(1.0, a3));
            }
            if (!sqs.empty()) {
                const auto& g4 = sqs[static_cast<std::size_t>(i) % sqs.size()];
                const SquareIdentity si = square_identity(t, g4, rho, f);
                const double off = b_subgraph(t, g4, rho, f, FormPart::Off);
                sq_id = std::max(sq_id, std::abs(si.total - off) / std::max(1.0, std::abs(off)));
                sq_neg = std::max(sq_neg, -std::min(si.alternating, si.deficit));
            }
        }
        record("on-diagonal-bound", samples, on, 1e-12);
        if (!tris.empty()) record("triangle-bound", samples, tri, 1e-12);
        if (!sqs.empty()) {
            record("square-identity", samples, sq_id, 1e-12);
            record("square-parts-nonnegative", samples, sq_neg, 1e-12);
        }
    }
    if (cert && cert->kappa > Rational(0)) {
        const double kappa = cert->kappa.to_double();
        const HeatSemigroup heat(t);
        double worst = -std::numeric_limits<double>::infinity();
        int count = 0;
        for (int i = 0; i < std::min(samples, 50); ++i) {
            const Density d(t, Density::normalized(t, rrho()).values());
            const double h0 = entropy(t, d);
            for (double time : {0.1, 0.5, 1.0}) {
                const double ht = entropy(t, heat.apply(d, time));
                worst = std::max(worst, ht - std::exp(-2 * kappa * time) * h0 * (1 + 1e-8));
                ++count;
            }
        }
        record("entropy-decay", count, worst, 1e-15);
    }

    json doc = header("verify", g);
    doc["certificate"] = cert ? json(cert->kappa.str()) : json(nullptr);
    json checks = json::array();
    bool all = true;
    for (const auto& r : rows) {
        checks.push_back({{"check", r.name}, {"samples", r.samples}, {"worst", num(r.worst)}, {"passed", r.passed}});
        all = all && r.passed;
    }
    doc["checks"] = checks;
    doc["passed"] = all;
    emit(doc, g, out);
    return all ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entropic Ricci curvature bounds for reversible finite Markov chains", "ricci"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--seed", g.seed, "Seed for every random component");
    app.set_version_flag("--version", kVersion);

    std::string spec;
    auto model_arg = [&](CLI::App* sub) {
        sub->add_option("model", spec, "bl(n,k) | rt(n) | complete(n) | product(A,B) | file:PATH")->required();
    };

    auto* info = app.add_subcommand("info", "Model summary");
    model_arg(info);
    std::string export_path;
    info->add_option("--export", export_path, "Write the chain to a file (.json for JSON)");

    auto* certify = app.add_subcommand("certify", "Exact curvature lower bound");
    model_arg(certify);

    EstimateOptions eo;
    auto* estimate = app.add_subcommand("estimate", "Numerical minimum of B/A");
    model_arg(estimate);
    estimate->add_option("--starts", eo.starts)->check(CLI::Range(1, 100000));
    estimate->add_option("--iterations", eo.max_iterations)->check(CLI::Range(0, 1000000));
    estimate->add_option("--max-states", eo.max_states);

    auto* gap = app.add_subcommand("gap", "Spectral gap");
    model_arg(gap);

    ReportOptions ro;
    auto* ineq = app.add_subcommand("inequalities", "Curvature, MLSI and spectral gap report");
    model_arg(ineq);
    ineq->add_option("--samples", ro.samples)->check(CLI::Range(1, 1000000));
    ineq->add_flag("--estimate", ro.estimate, "Include a numerical estimate");
    ineq->add_option("--starts", ro.estimator.starts)->check(CLI::Range(1, 100000));
    ineq->add_option("--iterations", ro.estimator.max_iterations)->check(CLI::Range(0, 1000000));

    TransportArgs ta;
    auto* transport = app.add_subcommand("transport", "Upper bound on the transport distance");
    model_arg(transport);
    transport->add_option("--from", ta.from, "Start density, comma separated (random if omitted)");
    transport->add_option("--to", ta.to, "End density, comma separated (random if omitted)");
    transport->add_option("--steps", ta.options.steps)->check(CLI::Range(1, kMaxSteps));
    transport->add_option("--max-steps", ta.options.max_steps)->check(CLI::Range(1, kMaxSteps));
    transport->add_option("--iterations", ta.options.max_iterations)->check(CLI::Range(0, 1000000));
    transport->add_option("--kappa", ta.kappa, "Run the convexity check with this kappa ('auto': certificate)");

    std::string eps = "0.1,0.01,0.001,0.0001";
    auto* counter = app.add_subcommand("counterexample", "B_off / A sweep on S3");
    counter->add_option("--eps", eps, "Comma separated values in (0,1)");

    int samples = 100;
    auto* verify = app.add_subcommand("verify", "Run the invariant suite on a model");
    model_arg(verify);
    verify->add_option("--samples", samples)->check(CLI::Range(1, 1000000));

    std::vector<std::string> reversed_args(args.rbegin(), args.rend());
    try {
        app.parse(reversed_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    if (ta.options.steps > ta.options.max_steps) {
        ta.options.max_steps = ta.options.steps;
    }

    try {
        if (counter->parsed()) {
            return cmd_counterexample(eps, g, out);
        }
        const ParsedModel m = parse_model(spec);
        if (info->parsed()) return cmd_info(m, export_path, g, out);
        if (certify->parsed()) return cmd_certify(m, g, out, err);
        if (estimate->parsed()) return cmd_estimate(m, eo, g, out);
        if (gap->parsed()) return cmd_gap(m, g, out);
        if (ineq->parsed()) return cmd_inequalities(m, ro, g, out);
        if (transport->parsed()) return cmd_transport(m, ta, g, out);
        if (verify->parsed()) return cmd_verify(m, samples, g, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace ricci::cli
