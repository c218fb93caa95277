#include "circleresp/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "circleresp/errors.hpp"

namespace circleresp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& text, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(context + ": cannot parse number '" + text + "'");
    }
}

long long parse_integer(const std::string& text, const std::string& context) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(context + ": cannot parse integer '" + text + "'");
    }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& context) {
    std::vector<double> out;
    std::string normalized = text;
    for (char& c : normalized)
        if (c == ',') c = ' ';
    std::istringstream in(normalized);
    std::string token;
    while (in >> token) out.push_back(parse_double(token, context));
    if (out.empty()) throw ConfigError(context + ": empty list");
    return out;
}

}  // namespace

TrigPoly parse_trig_poly(const std::string& text, const std::string& context) {
    TrigPoly poly;
    const std::string body = trim(text);
    if (body.empty() || body == "0") return poly;
    for (const std::string& raw : split(body, ',')) {
        const std::string term = trim(raw);
        if (term.empty()) throw ConfigError(context + ": empty term in '" + text + "'");
        const std::size_t sin_at = term.find("sin(");
        const std::size_t cos_at = term.find("cos(");
        if (sin_at == std::string::npos && cos_at == std::string::npos) {
            poly.constant += parse_double(term, context);
            continue;
        }
        const bool is_sin = sin_at != std::string::npos;
        const std::size_t fn_at = is_sin ? sin_at : cos_at;
        // Coefficient prefix: "", "-", or "c*".
        double coef = 1.0;
        std::string prefix = trim(term.substr(0, fn_at));
        if (!prefix.empty() && prefix.back() == '*') prefix = trim(prefix.substr(0, prefix.size() - 1));
        if (prefix == "-")
            coef = -1.0;
        else if (!prefix.empty())
            coef = parse_double(prefix, context);
        const std::size_t close = term.find(')', fn_at);
        if (close == std::string::npos || close + 1 != term.size())
            throw ConfigError(context + ": malformed term '" + term + "' (expected c*sin(k) or c*cos(k))");
        const long long mode = parse_integer(trim(term.substr(fn_at + 4, close - fn_at - 4)), context);
        if (mode < 1 || mode > 64)
            throw ConfigError(context + ": mode " + std::to_string(mode) + " out of range 1..64");
        TrigPoly::Term t;
        t.mode = static_cast<int>(mode);
        (is_sin ? t.sin_amp : t.cos_amp) = coef;
        poly.terms.push_back(t);
    }
    return poly;
}

namespace {

struct Assign {
    Scenario& sc;
    const std::string& context;

    void operator()(const std::string& section, const std::string& key, const std::string& value) {
        if (section.empty()) {
            if (key == "name") {
                sc.name = value;
                return;
            }
            throw ConfigError(context + ": key '" + key + "' outside any section");
        }
        if (section == "map") {
            if (key == "kind") sc.map_kind = value;
            else if (key == "a") sc.arnold_a = parse_double(value, context);
            else if (key == "epsilon") sc.arnold_epsilon = parse_double(value, context);
            else if (key == "degree") sc.custom_degree =
                static_cast<int>(parse_integer(value, context));
            else if (key == "lift") sc.custom_lift = parse_trig_poly(value, context);
            else throw ConfigError(context + ": unknown key '" + key + "' in [map]");
        } else if (section == "perturbation") {
            if (key == "s1") sc.s1 = parse_trig_poly(value, context);
            else if (key == "s2") sc.s2 = parse_trig_poly(value, context);
            else if (key == "delta_max") sc.delta_max = parse_double(value, context);
            else throw ConfigError(context + ": unknown key '" + key + "' in [perturbation]");
        } else if (section == "noise") {
            if (key == "xi") sc.xi = parse_double(value, context);
            else throw ConfigError(context + ": unknown key '" + key + "' in [noise]");
        } else if (section == "numerics") {
            if (key == "truncation_order") sc.truncation_order =
                static_cast<int>(parse_integer(value, context));
            else if (key == "quadrature_size") sc.quadrature_size =
                static_cast<int>(parse_integer(value, context));
            else if (key == "delta_grid") sc.delta_grid = parse_double_list(value, context);
            else if (key == "weak_norm") sc.weak_norm = value;
            else if (key == "markov_tol") sc.markov_tol = parse_double(value, context);
            else if (key == "ulam_bins") sc.ulam_bins =
                static_cast<int>(parse_integer(value, context));
            else if (key == "mc_steps") sc.mc_steps = parse_integer(value, context);
            else if (key == "mc_burn_in") sc.mc_burn_in = parse_integer(value, context);
            else if (key == "seed") sc.seed =
                static_cast<std::uint64_t>(parse_integer(value, context));
            else if (key == "threads") sc.threads =
                static_cast<int>(parse_integer(value, context));
            else throw ConfigError(context + ": unknown key '" + key + "' in [numerics]");
        } else if (section == "output") {
            if (key == "directory") sc.out_dir = value;
            else throw ConfigError(context + ": unknown key '" + key + "' in [output]");
        } else {
            throw ConfigError(context + ": unknown section [" + section + "]");
        }
    }
};

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    Scenario sc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string context = origin + ":" + std::to_string(line_no);
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(context + ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(context + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(context + ": empty key or value in '" + line + "'");
        Assign{sc, context}(section, key, value);
    }
    validate_scenario(sc);
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

void validate_scenario(const Scenario& sc) {
    if (sc.map_kind != "doubling" && sc.map_kind != "arnold" && sc.map_kind != "custom-coeffs")
        throw ConfigError("map kind must be doubling | arnold | custom-coeffs, got '" +
                          sc.map_kind + "'");
    if (sc.map_kind == "custom-coeffs" && sc.custom_degree == 0)
        throw ConfigError("custom-coeffs map needs a nonzero integer 'degree'");
    if (sc.s1.is_zero() && sc.s2.is_zero())
        throw ConfigError("perturbation profile is identically zero (nothing to respond to)");
    if (!(sc.delta_max > 0.0) || sc.delta_max > 0.5)
        throw ConfigError("delta_max must lie in (0, 0.5], got " + std::to_string(sc.delta_max));
    if (sc.truncation_order < 4 || sc.truncation_order > 256)
        throw ConfigError("truncation_order must lie in 4..256, got " +
                          std::to_string(sc.truncation_order));
    if (sc.quadrature_size != 0 && sc.quadrature_size < 4 * sc.truncation_order)
        throw ConfigError("quadrature_size must be >= 4*truncation_order (aliasing), got " +
                          std::to_string(sc.quadrature_size));
    if (sc.delta_grid.size() < 2)
        throw ConfigError("delta_grid needs at least 2 points for slope fits");
    for (double d : sc.delta_grid)
        if (!(d > 0.0) || d > sc.delta_max)
            throw ConfigError("delta_grid entries must lie in (0, delta_max], got " +
                              std::to_string(d));
    if (!sc.weak_norm.empty() && sc.weak_norm != "W11" && sc.weak_norm != "C0")
        throw ConfigError("weak_norm must be W11 or C0, got '" + sc.weak_norm + "'");
    if (sc.xi && !(*sc.xi > 0.0))
        throw ConfigError("noise xi must be positive; drop the [noise] section for the "
                          "deterministic scenario");
    if (!(sc.markov_tol > 0.0)) throw ConfigError("markov_tol must be positive");
    if (sc.ulam_bins != 0 && (sc.ulam_bins < 16 || sc.ulam_bins % kTrajectoryBins != 0))
        throw ConfigError("ulam_bins must be a multiple of 512 (so oracle grids nest), got " +
                          std::to_string(sc.ulam_bins));
    if (sc.mc_steps < 1000) throw ConfigError("mc_steps must be >= 1000");
    if (sc.mc_burn_in < 0) throw ConfigError("mc_burn_in must be >= 0");
    if (sc.threads < 1 || sc.threads > 64)
        throw ConfigError("threads must lie in 1..64");

    // Semantic checks that need the actual objects.
    MapFamily family = build_family(sc);
    try {
        validate_diffeo(family.perturbation);
    } catch (const AdmissibilityError& err) {
        throw ConfigError(std::string("perturbation family inadmissible: ") + err.what());
    }
    if (!sc.noisy()) {
        try {
            check_expansion(family.base);
        } catch (const ExpansionError& err) {
            throw ConfigError(std::string("deterministic scenario refused: ") + err.what());
        }
    }
}

MapFamily build_family(const Scenario& sc) {
    MapFamily family;
    if (sc.map_kind == "doubling") {
        family.base = doubling_map();
    } else if (sc.map_kind == "arnold") {
        family.base = arnold_map(sc.arnold_a, sc.arnold_epsilon);
    } else {
        family.base = trig_lift_map(sc.custom_degree, sc.custom_lift, "custom");
    }
    family.perturbation = DiffeoFamily{sc.s1, sc.s2, sc.delta_max};
    if (sc.xi) family.noise = NoiseKernel(*sc.xi);
    return family;
}

// ---------------------------------------------------------------------------
// Oracle comparison helpers

std::vector<double> spectral_bin_masses(const SpectralFunction& f, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
    const int n = f.truncation_order();
    std::vector<double> masses(static_cast<std::size_t>(n_bins), f.mean() / n_bins);
    // int_{a}^{b} e^{2 pi i k x} dx = (e^{2 pi i k b} - e^{2 pi i k a}) / (2 pi i k);
    // real parts pair k with -k, so only k >= 1 is summed with a factor 2 Re.
    for (int k = 1; k <= n; ++k) {
        const std::complex<double> ck = f.coeff(k);
        if (ck == std::complex<double>(0.0, 0.0)) continue;
        for (int i = 0; i < n_bins; ++i) {
            const std::complex<double> hi =
                std::polar(1.0, kTwoPi * k * static_cast<double>(i + 1) / n_bins);
            const std::complex<double> lo =
                std::polar(1.0, kTwoPi * k * static_cast<double>(i) / n_bins);
            const std::complex<double> integral = (hi - lo) / std::complex<double>(0.0, kTwoPi * k);
            masses[static_cast<std::size_t>(i)] += 2.0 * (ck * integral).real();
        }
    }
    return masses;
}

std::vector<double> coarsen_masses(const std::vector<double>& masses, int to_bins) {
    const int from_bins = static_cast<int>(masses.size());
    if (to_bins < 1 || from_bins % to_bins != 0)
        throw std::invalid_argument("coarsen_masses: bin counts do not nest");
    const int group = from_bins / to_bins;
    std::vector<double> out(static_cast<std::size_t>(to_bins), 0.0);
    for (int i = 0; i < from_bins; ++i) out[static_cast<std::size_t>(i / group)] += masses[static_cast<std::size_t>(i)];
    return out;
}

double l1_mass_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("l1_mass_distance: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return acc;
}

OracleComparison compare_report(const SpectralFunction& h, const std::vector<double>& ulam_density,
                                const TrajectoryEstimate& mc) {
    OracleComparison cmp;
    cmp.ulam_bins = static_cast<int>(ulam_density.size());
    if (cmp.ulam_bins % kTrajectoryBins != 0)
        throw std::invalid_argument("compare_report: ulam bins must be a multiple of 512");

    std::vector<double> ulam_masses(ulam_density.size());
    for (std::size_t i = 0; i < ulam_density.size(); ++i)
        ulam_masses[i] = ulam_density[i] / cmp.ulam_bins;

    const std::vector<double> spectral_fine = spectral_bin_masses(h, cmp.ulam_bins);
    cmp.spectral_vs_ulam = l1_mass_distance(spectral_fine, ulam_masses);

    const std::vector<double> spectral_coarse = coarsen_masses(spectral_fine, kTrajectoryBins);
    const std::vector<double> ulam_coarse = coarsen_masses(ulam_masses, kTrajectoryBins);
    cmp.spectral_vs_mc = l1_mass_distance(spectral_coarse, mc.histogram);
    cmp.ulam_vs_mc = l1_mass_distance(ulam_coarse, mc.histogram);
    cmp.mc_tolerance = 5.0 * mc.stderr_proxy * std::sqrt(static_cast<double>(kTrajectoryBins));
    return cmp;
}

std::string format_g17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void apply_override(Scenario& sc, const std::string& key_equals_value) {
    const std::size_t eq = key_equals_value.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--param expects key=value, got '" + key_equals_value + "'");
    const std::string key = trim(key_equals_value.substr(0, eq));
    const std::string value = trim(key_equals_value.substr(eq + 1));
    const std::string context = "--param " + key;
    if (key == "delta" || key == "delta_grid") {
        sc.delta_grid = parse_double_list(value, context);
    } else if (key == "xi") {
        sc.xi = parse_double(value, context);
    } else if (key == "truncation_order" || key == "quadrature_size" || key == "ulam_bins" ||
               key == "mc_steps" || key == "mc_burn_in" || key == "seed" || key == "threads" ||
               key == "weak_norm" || key == "markov_tol") {
        Assign{sc, context}("numerics", key, value);
    } else {
        throw ConfigError("--param cannot override key '" + key + "'");
    }
    validate_scenario(sc);
}

}  // namespace circleresp
