#include "dvl/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dvl {

using json = nlohmann::json;

Manifest Manifest::parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("manifest: invalid json: ") + e.what());
    }
    Manifest m;
    for (const auto& tj : j.at("tables")) {
        ManifestTable t;
        t.name = tj.at("name").get<std::string>();
        t.path = tj.at("path").get<std::string>();
        if (tj.contains("keys"))
            t.keys = tj.at("keys").get<std::vector<std::vector<std::string>>>();
        if (tj.contains("types"))
            for (auto it = tj.at("types").begin(); it != tj.at("types").end(); ++it)
                t.types.emplace(it.key(), AttributeType{type_from_name(it.value())});
        m.tables.push_back(std::move(t));
    }
    if (j.contains("constraints")) {
        for (const auto& cj : j.at("constraints")) {
            ForeignKey fk;
            fk.name = cj.at("name").get<std::string>();
            fk.src_table = cj.at("src").at("table").get<std::string>();
            fk.src_attrs = cj.at("src").at("attrs").get<std::vector<std::string>>();
            fk.dst_table = cj.at("dst").at("table").get<std::string>();
            fk.dst_attrs = cj.at("dst").at("attrs").get<std::vector<std::string>>();
            m.constraints.push_back(std::move(fk));
        }
    }
    if (j.contains("prep")) m.prep = TransformPlan::from_json(j.at("prep").dump());
    return m;
}

Database load_database(const Manifest& manifest,
                       const std::function<std::string(const std::string&)>& read_file) {
    Database db;
    for (const auto& t : manifest.tables)
        db.add_table(load_table(read_file(t.path), t.name, t.types, t.keys));
    for (const auto& fk : manifest.constraints) db.add_constraint(fk);
    return db;
}

Database load_database_from_dir(const Manifest& manifest, const std::string& base_dir) {
    return load_database(manifest, [&](const std::string& path) {
        std::filesystem::path p(path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        return read_text_file(p.string());
    });
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace dvl
