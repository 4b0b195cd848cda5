#include "morphrom/store.hpp"

#include <fstream>

#include "morphrom/errors.hpp"
#include "morphrom/util.hpp"

namespace morphrom {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IntegrityError("store: cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IntegrityError("store: malformed JSON in " + path.string() + ": " + e.what());
    }
    return doc;
}

void save_json_atomic(const std::filesystem::path& path, const json& doc) {
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IntegrityError("store: cannot write " + tmp.string());
        out << doc.dump(2) << '\n';
        if (!out) throw IntegrityError("store: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

json save_block(const std::filesystem::path& store_dir, const std::string& rel,
                const std::vector<double>& values) {
    std::filesystem::path path = store_dir / rel;
    std::filesystem::create_directories(path.parent_path());
    write_f64(path, values);
    json entry;
    entry["file"] = rel;
    entry["length"] = values.size();
    entry["checksum"] = checksum_f64(values);
    return entry;
}

std::vector<double> load_block(const std::filesystem::path& store_dir, const json& entry) {
    std::string rel = entry.at("file").get<std::string>();
    std::filesystem::path path = store_dir / rel;
    std::vector<double> values = read_f64(path);
    if (values.size() != entry.at("length").get<std::size_t>())
        throw IntegrityError("store: length mismatch in " + path.string());
    if (checksum_f64(values) != entry.at("checksum").get<std::string>())
        throw IntegrityError("store: checksum mismatch in " + path.string());
    return values;
}

json save_matrix_block(const std::filesystem::path& store_dir, const std::string& rel,
                       const Matrix& m) {
    json entry = save_block(store_dir, rel, m.a);
    entry["rows"] = m.rows;
    entry["cols"] = m.cols;
    return entry;
}

Matrix load_matrix_block(const std::filesystem::path& store_dir, const json& entry) {
    std::vector<double> values = load_block(store_dir, entry);
    int rows = entry.at("rows").get<int>();
    int cols = entry.at("cols").get<int>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != values.size())
        throw IntegrityError("store: matrix shape mismatch in " + entry.at("file").get<std::string>());
    Matrix m(rows, cols);
    m.a = std::move(values);
    return m;
}

}  // namespace morphrom
