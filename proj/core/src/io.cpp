#include "ftsvd/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ftsvd/error.hpp"

namespace ftsvd::io {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) return out;
        start = comma + 1;
    }
}

double parse_double(const std::string& field, std::size_t line) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) throw ParseError("not a number: '" + field + "'", line);
    if (!std::isfinite(value)) throw ParseError("non-finite value: '" + field + "'", line);
    return value;
}

std::size_t parse_index(const std::string& field, std::size_t line) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError("not a positive integer index: '" + field + "'", line);
    }
    if (value == 0) throw ParseError("indices are 1-based; got 0", line);
    return value;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void expect_header(std::istream& is, std::initializer_list<std::string_view> accepted) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty file, expected a header", 1);
    const std::string got = trim(line);
    for (auto h : accepted) {
        if (got == h) return;
    }
    throw ParseError("unexpected header '" + got + "', expected '" + std::string(*accepted.begin()) + "'", 1);
}

Tensor3 read_long_csv(std::istream& is, std::initializer_list<std::string_view> headers) {
    expect_header(is, headers);
    struct Entry {
        std::size_t i, j, k;
        double value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    std::size_t p1 = 0, p2 = 0, n = 0;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
        Entry e{parse_index(fields[0], line_no), parse_index(fields[1], line_no), parse_index(fields[2], line_no),
                parse_double(fields[3], line_no), line_no};
        p1 = std::max(p1, e.i);
        p2 = std::max(p2, e.j);
        n = std::max(n, e.k);
        entries.push_back(e);
    }
    if (entries.empty()) throw SchemaError("tensor file has no entries");
    if (entries.size() != p1 * p2 * n) {
        throw SchemaError("tensor file has " + std::to_string(entries.size()) + " entries but indices imply " +
                          std::to_string(p1) + "x" + std::to_string(p2) + "x" + std::to_string(n));
    }
    Tensor3 t(p1, p2, n);
    std::vector<bool> seen(p1 * p2 * n, false);
    for (const auto& e : entries) {
        const std::size_t slot = (e.j - 1) + p2 * ((e.i - 1) + p1 * (e.k - 1));
        if (seen[slot]) throw SchemaError("duplicate entry (" + std::to_string(e.i) + "," + std::to_string(e.j) + "," +
                                          std::to_string(e.k) + ") at line " + std::to_string(e.line));
        seen[slot] = true;
        t(e.i - 1, e.j - 1, e.k - 1) = e.value;
    }
    return t;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), Eigen::Index(v.size())); }

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_tensor_csv(std::ostream& os, const Tensor3& t) {
    os << "i,j,k,value\n";
    for (std::size_t k = 0; k < t.n(); ++k)
        for (std::size_t i = 0; i < t.p1(); ++i)
            for (std::size_t j = 0; j < t.p2(); ++j)
                os << i + 1 << ',' << j + 1 << ',' << k + 1 << ',' << format_double(t(i, j, k)) << '\n';
}

void write_tensor_csv(const fs::path& path, const Tensor3& t) {
    auto out = open_out(path);
    write_tensor_csv(out, t);
    if (!out) throw IoError("write failed: " + path.string());
}

Tensor3 read_tensor_csv(std::istream& is) {
    Tensor3 t = read_long_csv(is, {"i,j,k,value"});
    return t;
}

Tensor3 read_tensor_csv(const fs::path& path) {
    auto in = open_in(path);
    return read_tensor_csv(in);
}

Tensor3 read_count_csv(const fs::path& path) {
    auto in = open_in(path);
    return read_long_csv(in, {"i,j,k,count", "i,j,k,value"});
}

void write_grid(std::ostream& os, const TimeGrid& grid) {
    for (double s : grid.points()) os << format_double(s) << '\n';
}

void write_grid(const fs::path& path, const TimeGrid& grid) {
    auto out = open_out(path);
    write_grid(out, grid);
}

std::vector<double> read_grid_values(std::istream& is) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto field = trim(line);
        if (field.empty()) continue;
        const double s = parse_double(field, line_no);
        if (s < 0.0 || s > 1.0) throw ParseError("time value outside [0, 1]", line_no);
        values.push_back(s);
    }
    if (values.empty()) throw SchemaError("grid file is empty");
    return values;
}

std::vector<double> read_grid_values(const fs::path& path) {
    auto in = open_in(path);
    return read_grid_values(in);
}

Dataset read_dataset(const fs::path& tensor_path, const fs::path& grid_path) {
    Tensor3 y = read_tensor_csv(tensor_path);
    TimeGrid grid(read_grid_values(grid_path));
    if (grid.size() != y.n()) {
        throw SchemaError("grid has " + std::to_string(grid.size()) + " points but the tensor has n = " + std::to_string(y.n()));
    }
    if (!grid.was_sorted()) y = y.permute_time(grid.permutation());
    return {std::move(y), std::move(grid)};
}

void write_vector_csv(const fs::path& path, const Vector& v) {
    auto out = open_out(path);
    out << "index,value\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << i + 1 << ',' << format_double(v(i)) << '\n';
}

Vector read_vector_csv(const fs::path& path) {
    auto in = open_in(path);
    expect_header(in, {"index,value"});
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
        if (parse_index(fields[0], line_no) != values.size() + 1) throw SchemaError("vector indices must be 1..n in order");
        values.push_back(parse_double(fields[1], line_no));
    }
    return to_eigen(values);
}

void write_beta_csv(const fs::path& path, const RkhsFunction& f) {
    auto out = open_out(path);
    out << "k,s,beta\n";
    for (std::size_t k = 0; k < f.grid.size(); ++k)
        out << k + 1 << ',' << format_double(f.grid[k]) << ',' << format_double(f.beta(Eigen::Index(k))) << '\n';
}

RkhsFunction read_beta_csv(const fs::path& path) {
    auto in = open_in(path);
    expect_header(in, {"k,s,beta"});
    std::vector<double> s, beta;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
        if (parse_index(fields[0], line_no) != s.size() + 1) throw SchemaError("beta rows must be numbered 1..n in order");
        s.push_back(parse_double(fields[1], line_no));
        beta.push_back(parse_double(fields[2], line_no));
    }
    TimeGrid grid(s);
    if (!grid.was_sorted()) throw SchemaError("beta file grid is not sorted");
    return {std::move(grid), to_eigen(beta), {}};
}

void write_function_sample(const fs::path& path, const std::function<double(double)>& f, std::size_t points) {
    if (points < 2) throw ArgumentError("plot grid needs at least 2 points");
    auto out = open_out(path);
    out << "t,value\n";
    for (std::size_t u = 0; u < points; ++u) {
        const double t = double(u) / double(points - 1);
        out << format_double(t) << ',' << format_double(f(t)) << '\n';
    }
}

void write_function_sample(const fs::path& path, const RkhsFunction& f, std::size_t points) {
    if (points < 2) throw ArgumentError("plot grid needs at least 2 points");
    std::vector<double> ts(points);
    for (std::size_t u = 0; u < points; ++u) ts[u] = double(u) / double(points - 1);
    const Vector values = evaluate(f, ts);
    auto out = open_out(path);
    out << "t,value\n";
    for (std::size_t u = 0; u < points; ++u) out << format_double(ts[u]) << ',' << format_double(values(Eigen::Index(u))) << '\n';
}

void write_trace_csv(const fs::path& path, const Decomposition& d) {
    auto out = open_out(path);
    out << "component,iteration,step_a,step_b,step_xi,lambda\n";
    for (std::size_t l = 0; l < d.trace.size(); ++l) {
        for (const auto& rec : d.trace[l].iterations) {
            out << l + 1 << ',' << rec.iteration << ',' << format_double(rec.step_a) << ',' << format_double(rec.step_b)
                << ',' << format_double(rec.step_xi) << ',' << format_double(rec.lambda) << '\n';
        }
    }
}

void write_bands_csv(const fs::path& path, std::span<const TrajectoryBand> bands) {
    auto out = open_out(path);
    out << "time_index,group,mean,low,high\n";
    for (const auto& b : bands) {
        out << b.time_index + 1 << ',' << b.group << ',' << format_double(b.mean) << ',' << format_double(b.low) << ','
            << format_double(b.high) << '\n';
    }
}

json to_json(const KernelSpec& spec) { return {{"kind", to_string(spec.kind)}, {"eigenvalues", spec.eigenvalues}}; }

KernelSpec kernel_spec_from_json(const json& j) {
    const auto kind = kernel_kind_from_string(j.at("kind").get<std::string>());
    std::vector<double> mu = j.value("eigenvalues", std::vector<double>{});
    if (kind == KernelKind::eigen_list) return KernelSpec::from_eigenvalues(std::move(mu));
    return {kind, std::move(mu)};
}

json to_json(const RkhsFunction& f) {
    return {{"grid", std::vector<double>(f.grid.points().begin(), f.grid.points().end())},
            {"beta", to_std(f.beta)},
            {"kernel", to_json(f.spec)}};
}

RkhsFunction rkhs_function_from_json(const json& j) {
    TimeGrid grid(j.at("grid").get<std::vector<double>>());
    if (!grid.was_sorted()) throw SchemaError("function grid must be sorted");
    Vector beta = to_eigen(j.at("beta").get<std::vector<double>>());
    if (std::size_t(beta.size()) != grid.size()) throw SchemaError("beta length does not match grid");
    KernelSpec spec = j.contains("kernel") ? kernel_spec_from_json(j.at("kernel")) : KernelSpec{};
    return {std::move(grid), std::move(beta), std::move(spec)};
}

json to_json(const FitConfig& cfg) {
    return {{"rank", cfg.rank}, {"iters", cfg.iters}, {"c_lambda", cfg.c_lambda}, {"tol", cfg.tol}, {"quad_m", cfg.quad_m}};
}

FitConfig fit_config_from_json(const json& j) {
    FitConfig cfg;
    cfg.rank = j.value("rank", cfg.rank);
    cfg.iters = j.value("iters", cfg.iters);
    cfg.c_lambda = j.value("c_lambda", cfg.c_lambda);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.quad_m = j.value("quad_m", cfg.quad_m);
    return cfg;
}

json to_json(const SimConfig& cfg) {
    return {{"p1", cfg.p1},         {"p2", cfg.p2},       {"n", cfg.n},     {"r", cfg.r},
            {"lambda_min", cfg.lambda_min}, {"sigma", cfg.sigma}, {"tau", cfg.tau}, {"seed", cfg.seed},
            {"n_basis", cfg.n_basis}};
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig cfg;
    cfg.p1 = j.at("p1").get<std::size_t>();
    cfg.p2 = j.at("p2").get<std::size_t>();
    cfg.n = j.at("n").get<std::size_t>();
    cfg.r = j.at("r").get<std::size_t>();
    cfg.lambda_min = j.at("lambda_min").get<double>();
    cfg.sigma = j.at("sigma").get<double>();
    cfg.tau = j.at("tau").get<double>();
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.n_basis = j.value("n_basis", std::size_t{10});
    return cfg;
}

json to_json(const GroundTruth& truth, const SimConfig& cfg) {
    json comps = json::array();
    for (const auto& c : truth.components) {
        comps.push_back({{"lambda", c.lambda}, {"a", to_std(c.a)}, {"b", to_std(c.b)}, {"xi_coeffs", c.xi.coeffs}});
    }
    json remainder = json::array();
    for (const auto& f : truth.remainder) remainder.push_back(f.coeffs);
    return {{"format", "ftsvd-truth"},
            {"version", 1},
            {"basis", "u1=1, ui=sqrt(2)cos((i-1)pi s)"},
            {"config", to_json(cfg)},
            {"components", std::move(comps)},
            {"remainder_coeffs", std::move(remainder)}};
}

GroundTruth ground_truth_from_json(const json& j) {
    const SimConfig cfg = sim_config_from_json(j.at("config"));
    GroundTruth truth;
    truth.p1 = cfg.p1;
    truth.p2 = cfg.p2;
    for (const auto& c : j.at("components")) {
        TrueComponent tc;
        tc.lambda = c.at("lambda").get<double>();
        tc.a = to_eigen(c.at("a").get<std::vector<double>>());
        tc.b = to_eigen(c.at("b").get<std::vector<double>>());
        tc.xi.coeffs = c.at("xi_coeffs").get<std::vector<double>>();
        if (std::size_t(tc.a.size()) != cfg.p1 || std::size_t(tc.b.size()) != cfg.p2) {
            throw SchemaError("truth component vector lengths do not match config");
        }
        truth.components.push_back(std::move(tc));
    }
    for (const auto& f : j.value("remainder_coeffs", json::array())) truth.remainder.push_back({f.get<std::vector<double>>()});
    if (!truth.remainder.empty() && truth.remainder.size() != cfg.p1 * cfg.p2) {
        throw SchemaError("remainder_coeffs must have p1*p2 entries");
    }
    return truth;
}

json to_json(const EvalReport& report) {
    json comps = json::array();
    for (std::size_t l = 0; l < report.errors.size(); ++l) {
        const auto& e = report.errors[l];
        comps.push_back({{"truth_index", l + 1},
                         {"estimate_index", report.matching[l] + 1},
                         {"dist_a", e.dist_a},
                         {"dist_b", e.dist_b},
                         {"dist_xi", e.dist_xi}});
    }
    auto agg = [](const ComponentErrors& e) { return json{{"dist_a", e.dist_a}, {"dist_b", e.dist_b}, {"dist_xi", e.dist_xi}}; };
    return {{"format", "ftsvd-eval"}, {"components", std::move(comps)}, {"mean", agg(report.mean)}, {"sd", agg(report.sd)}};
}

json write_decomposition(const fs::path& dir, const Decomposition& d, std::size_t plot_points, const json& extra) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    json comps = json::array();
    for (std::size_t l = 0; l < d.components.size(); ++l) {
        const auto& c = d.components[l];
        const std::string stem = "component_" + std::to_string(l + 1);
        write_vector_csv(dir / (stem + "_a.csv"), c.a);
        write_vector_csv(dir / (stem + "_b.csv"), c.b);
        write_beta_csv(dir / (stem + "_beta.csv"), c.xi);
        write_function_sample(dir / (stem + "_xi_sampled.csv"), c.xi, plot_points);
        json entry{{"index", l + 1},
                   {"lambda", c.lambda},
                   {"a_file", stem + "_a.csv"},
                   {"b_file", stem + "_b.csv"},
                   {"beta_file", stem + "_beta.csv"},
                   {"sample_file", stem + "_xi_sampled.csv"}};
        if (l < d.trace.size()) {
            entry["iterations"] = d.trace[l].iterations.empty() ? 0 : d.trace[l].iterations.back().iteration;
            entry["early_stopped"] = d.trace[l].early_stopped;
        }
        comps.push_back(std::move(entry));
    }
    write_trace_csv(dir / "trace.csv", d);

    json manifest{{"format", "ftsvd-decomposition"},
                  {"version", 1},
                  {"lambda_scale", "projection coefficient <Y, a(x)b(x)xi_n> / ||xi_n||^2 (continuous scale)"},
                  {"kernel", to_json(KernelSpec::bernoulli())},
                  {"config", to_json(d.config)},
                  {"lambdas", json::array()},
                  {"components", std::move(comps)},
                  {"residual_frob", d.residual_frob},
                  {"residual_after", d.residual_after},
                  {"bic", d.bic ? json(*d.bic) : json(nullptr)},
                  {"truncated", d.truncated},
                  {"truncation_reason", d.truncation_reason},
                  {"trace_file", "trace.csv"}};
    for (const auto& c : d.components) manifest["lambdas"].push_back(c.lambda);
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    write_json(dir / "manifest.json", manifest);
    return manifest;
}

Decomposition read_decomposition(const fs::path& dir) {
    const json manifest = read_json(dir / "manifest.json");
    if (manifest.value("format", std::string{}) != "ftsvd-decomposition") {
        throw SchemaError(dir.string() + "/manifest.json is not a decomposition manifest");
    }
    Decomposition d;
    d.config = fit_config_from_json(manifest.at("config"));
    d.residual_frob = manifest.value("residual_frob", 0.0);
    d.residual_after = manifest.value("residual_after", std::vector<double>{});
    if (manifest.contains("bic") && !manifest.at("bic").is_null()) d.bic = manifest.at("bic").get<double>();
    d.truncated = manifest.value("truncated", false);
    d.truncation_reason = manifest.value("truncation_reason", std::string{});
    for (const auto& entry : manifest.at("components")) {
        Component c;
        c.lambda = entry.at("lambda").get<double>();
        c.a = read_vector_csv(dir / entry.at("a_file").get<std::string>());
        c.b = read_vector_csv(dir / entry.at("b_file").get<std::string>());
        c.xi = read_beta_csv(dir / entry.at("beta_file").get<std::string>());
        d.components.push_back(std::move(c));
    }
    return d;
}

json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ftsvd::io
