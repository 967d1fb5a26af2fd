#include "degchemo/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace degchemo {

namespace {

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
    const Grid& g = f.grid;
    nlohmann::json header;
    header["dim"] = g.dim();
    header["lengths"] = nlohmann::json::array();
    header["cells"] = nlohmann::json::array();
    for (int k = 0; k < g.dim(); ++k) {
        header["lengths"].push_back(g.length(k));
        header["cells"].push_back(g.cells(k));
    }
    header["boundary_value"] = f.boundary_value;
    header["dtype"] = "f64-le";
    out << header.dump() << '\n';
    for (double v : f.values) {
        const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
        char buf[8];
        std::memcpy(buf, &bits, 8);
        out.write(buf, 8);
    }
    if (!out) throw std::runtime_error("failed writing field data");
}

ScalarField read_field(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("field stream has no header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad field header: ") + e.what());
    }
    if (header.value("dtype", std::string{}) != "f64-le") {
        throw InvalidArgument("unsupported field dtype");
    }
    const int dim = header.at("dim").get<int>();
    const auto lengths = header.at("lengths").get<std::vector<double>>();
    const auto cells = header.at("cells").get<std::vector<int>>();
    Grid g = make_grid(dim, lengths, cells);
    ScalarField f(g, 0.0, header.at("boundary_value").get<double>());
    for (double& v : f.values) {
        char buf[8];
        in.read(buf, 8);
        if (in.gcount() != 8) throw InvalidArgument("truncated field data");
        std::uint64_t bits;
        std::memcpy(&bits, buf, 8);
        v = std::bit_cast<double>(to_le(bits));
    }
    return f;
}

void save_field(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_field(out, f);
}

ScalarField load_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    return read_field(in);
}

}  // namespace degchemo
