#include "simforge/store/session_store.hpp"

#include <sqlite3.h>

#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>

#include "simforge/core/json.hpp"
#include "simforge/errors.hpp"

namespace simforge::store {

namespace {

using nlohmann::json;

// Session id reserved for store-level rows in the metadata table.
constexpr std::string_view kStoreRow = "";

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY
);
CREATE TABLE IF NOT EXISTS state_variables (
    session_id TEXT NOT NULL,
    position INTEGER NOT NULL,
    name TEXT NOT NULL,
    value TEXT NOT NULL,
    value_type TEXT NOT NULL,
    description TEXT NOT NULL,
    dont_clean INTEGER NOT NULL,
    PRIMARY KEY (session_id, position)
);
CREATE TABLE IF NOT EXISTS functions (
    session_id TEXT NOT NULL,
    position INTEGER NOT NULL,
    name TEXT NOT NULL,
    kind TEXT NOT NULL,
    code TEXT NOT NULL,
    relevant_state TEXT NOT NULL,
    description TEXT NOT NULL,
    PRIMARY KEY (session_id, position)
);
CREATE TABLE IF NOT EXISTS queries (
    session_id TEXT NOT NULL,
    position INTEGER NOT NULL,
    text TEXT NOT NULL,
    PRIMARY KEY (session_id, position)
);
CREATE TABLE IF NOT EXISTS metadata (
    session_id TEXT NOT NULL,
    key TEXT NOT NULL,
    value TEXT NOT NULL,
    PRIMARY KEY (session_id, key)
);
CREATE TABLE IF NOT EXISTS agent_transcripts (
    session_id TEXT NOT NULL,
    agent_role TEXT NOT NULL,
    step_index INTEGER NOT NULL,
    body TEXT NOT NULL,
    PRIMARY KEY (session_id, agent_role, step_index)
);
CREATE TABLE IF NOT EXISTS snapshots (
    snapshot_id INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL,
    created_at INTEGER NOT NULL,
    payload TEXT NOT NULL
);
)sql";

class Statement {
public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            throw StorageFailure(std::string("prepare failed: ") + sqlite3_errmsg(db));
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }

    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int index, std::string_view text) {
        check(sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int index, std::int64_t value) {
        check(sqlite3_bind_int64(stmt_, index, value));
        return *this;
    }
    Statement& bind(int index, int value) { return bind(index, static_cast<std::int64_t>(value)); }

    /// True while a row is available.
    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw StorageFailure(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    void run() {
        while (step()) {
        }
    }

    std::string text(int col) const {
        auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
        int n = sqlite3_column_bytes(stmt_, col);
        return p ? std::string(p, static_cast<std::size_t>(n)) : std::string();
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) throw StorageFailure(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StorageFailure("sql failed: " + msg);
    }
}

class Transaction {
public:
    explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE"); }
    ~Transaction() {
        if (!committed_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
        exec(db_, "COMMIT");
        committed_ = true;
    }

private:
    sqlite3* db_;
    bool committed_ = false;
};

std::int64_t to_millis(std::chrono::system_clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

std::chrono::system_clock::time_point from_millis(std::int64_t ms) {
    return std::chrono::system_clock::time_point(std::chrono::milliseconds(ms));
}

}  // namespace

struct SessionStore::Impl {
    sqlite3* db = nullptr;
    OpenMode mode = OpenMode::ReadWrite;
    mutable std::mutex mutex;
    std::function<void(std::string_view)> fault;

    ~Impl() {
        if (db) sqlite3_close_v2(db);
    }

    void require_writable() const {
        if (mode == OpenMode::ReadOnly) throw StorageFailure("store opened read-only");
    }

    void before_write(std::string_view table) const {
        if (fault) fault(table);
    }

    std::optional<std::string> schema_version() const {
        Statement probe(db, "SELECT count(*) FROM sqlite_master WHERE type='table' AND name='metadata'");
        probe.step();
        if (probe.integer(0) == 0) return std::nullopt;
        Statement q(db, "SELECT value FROM metadata WHERE session_id = ?1 AND key = 'schema_version'");
        q.bind(1, kStoreRow);
        if (!q.step()) return std::nullopt;
        return q.text(0);
    }

    bool exists(const std::string& session_id) const {
        Statement q(db, "SELECT 1 FROM sessions WHERE session_id = ?1");
        q.bind(1, session_id);
        return q.step();
    }

    void write_rows(const std::string& session_id, const core::SessionModel& model) {
        for (const char* table : {"state_variables", "functions", "queries", "metadata"}) {
            std::string sql = std::string("DELETE FROM ") + table + " WHERE session_id = ?1";
            Statement del(db, sql.c_str());
            del.bind(1, session_id).run();
        }
        {
            Statement ins(db, "INSERT OR IGNORE INTO sessions (session_id) VALUES (?1)");
            ins.bind(1, session_id).run();
        }
        int pos = 0;
        for (const auto& var : model.state_variables) {
            before_write("state_variables");
            Statement ins(db,
                          "INSERT INTO state_variables (session_id, position, name, value, value_type, description, "
                          "dont_clean) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");
            ins.bind(1, session_id)
                .bind(2, pos++)
                .bind(3, var.name)
                .bind(4, var.value)
                .bind(5, core::to_string(var.type))
                .bind(6, var.description)
                .bind(7, var.dont_clean ? 1 : 0)
                .run();
        }
        pos = 0;
        for (const auto& fn : model.functions) {
            before_write("functions");
            Statement ins(db,
                          "INSERT INTO functions (session_id, position, name, kind, code, relevant_state, "
                          "description) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");
            ins.bind(1, session_id)
                .bind(2, pos++)
                .bind(3, fn.name)
                .bind(4, core::to_string(fn.kind))
                .bind(5, fn.code)
                .bind(6, json(fn.relevant_state).dump())
                .bind(7, fn.description)
                .run();
        }
        pos = 0;
        for (const auto& text : model.queries) {
            before_write("queries");
            Statement ins(db, "INSERT INTO queries (session_id, position, text) VALUES (?1, ?2, ?3)");
            ins.bind(1, session_id).bind(2, pos++).bind(3, text).run();
        }
        for (const auto& [key, value] : model.metadata) {
            before_write("metadata");
            Statement ins(db, "INSERT INTO metadata (session_id, key, value) VALUES (?1, ?2, ?3)");
            ins.bind(1, session_id).bind(2, key).bind(3, value).run();
        }
    }

    core::SessionModel read(const std::string& session_id) const {
        if (!exists(session_id)) throw UnknownSession("unknown session '" + session_id + "'");
        core::SessionModel model;
        {
            Statement q(db,
                        "SELECT name, value, value_type, description, dont_clean FROM state_variables "
                        "WHERE session_id = ?1 ORDER BY position");
            q.bind(1, session_id);
            while (q.step()) {
                core::StateVariable var;
                var.name = q.text(0);
                var.value = q.text(1);
                auto type = core::parse_value_type(q.text(2));
                if (!type) throw StorageFailure("corrupt value_type for '" + var.name + "'");
                var.type = *type;
                var.description = q.text(3);
                var.dont_clean = q.integer(4) != 0;
                model.state_variables.push_back(std::move(var));
            }
        }
        {
            Statement q(db,
                        "SELECT name, kind, code, relevant_state, description FROM functions "
                        "WHERE session_id = ?1 ORDER BY position");
            q.bind(1, session_id);
            while (q.step()) {
                core::FunctionArtifact fn;
                fn.name = q.text(0);
                auto kind = core::parse_function_kind(q.text(1));
                if (!kind) throw StorageFailure("corrupt function kind for '" + fn.name + "'");
                fn.kind = *kind;
                fn.code = q.text(2);
                try {
                    fn.relevant_state = json::parse(q.text(3)).get<std::vector<std::string>>();
                } catch (const json::exception& e) {
                    throw StorageFailure("corrupt relevant_state for '" + fn.name + "': " + e.what());
                }
                fn.description = q.text(4);
                model.functions.push_back(std::move(fn));
            }
        }
        {
            Statement q(db, "SELECT text FROM queries WHERE session_id = ?1 ORDER BY position");
            q.bind(1, session_id);
            while (q.step()) model.queries.push_back(q.text(0));
        }
        {
            Statement q(db, "SELECT key, value FROM metadata WHERE session_id = ?1 ORDER BY key");
            q.bind(1, session_id);
            while (q.step()) model.metadata.emplace(q.text(0), q.text(1));
        }
        return model;
    }
};

SessionStore::SessionStore(const std::filesystem::path& path, OpenMode mode) : impl_(std::make_unique<Impl>()) {
    impl_->mode = mode;
    int flags = SQLITE_OPEN_FULLMUTEX;
    flags |= mode == OpenMode::ReadOnly ? SQLITE_OPEN_READONLY : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
    if (sqlite3_open_v2(path.string().c_str(), &impl_->db, flags, nullptr) != SQLITE_OK) {
        std::string msg = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
        throw StorageFailure("cannot open store '" + path.string() + "': " + msg);
    }
    sqlite3_busy_timeout(impl_->db, 5000);

    auto version = impl_->schema_version();
    if (version && *version != std::to_string(kSchemaVersion)) {
        throw MigrationRequired("store schema version " + *version + " is not supported (expected " +
                                std::to_string(kSchemaVersion) + ")");
    }
    if (mode == OpenMode::ReadOnly) {
        if (!version) throw StorageFailure("'" + path.string() + "' is not a session store");
        return;
    }
    exec(impl_->db, kSchema);
    if (!version) {
        Statement ins(impl_->db, "INSERT INTO metadata (session_id, key, value) VALUES (?1, 'schema_version', ?2)");
        ins.bind(1, kStoreRow).bind(2, std::to_string(kSchemaVersion)).run();
    }
}

SessionStore::~SessionStore() = default;

void SessionStore::save(const std::string& session_id, const core::SessionModel& model) {
    if (session_id.empty()) throw StorageFailure("session id must be non-empty");
    std::lock_guard lock(impl_->mutex);
    impl_->require_writable();
    Transaction tx(impl_->db);
    impl_->write_rows(session_id, model);
    tx.commit();
}

core::SessionModel SessionStore::load(const std::string& session_id) const {
    std::lock_guard lock(impl_->mutex);
    return impl_->read(session_id);
}

bool SessionStore::exists(const std::string& session_id) const {
    std::lock_guard lock(impl_->mutex);
    return impl_->exists(session_id);
}

std::vector<std::string> SessionStore::sessions() const {
    std::lock_guard lock(impl_->mutex);
    Statement q(impl_->db, "SELECT session_id FROM sessions ORDER BY session_id");
    std::vector<std::string> out;
    while (q.step()) out.push_back(q.text(0));
    return out;
}

void SessionStore::remove(const std::string& session_id) {
    std::lock_guard lock(impl_->mutex);
    impl_->require_writable();
    Transaction tx(impl_->db);
    for (const char* table :
         {"sessions", "state_variables", "functions", "queries", "metadata", "agent_transcripts", "snapshots"}) {
        std::string sql = std::string("DELETE FROM ") + table + " WHERE session_id = ?1";
        Statement del(impl_->db, sql.c_str());
        del.bind(1, session_id).run();
    }
    tx.commit();
}

SnapshotHandle SessionStore::snapshot(const std::string& session_id) {
    std::lock_guard lock(impl_->mutex);
    impl_->require_writable();
    auto model = impl_->read(session_id);
    auto now = std::chrono::system_clock::now();
    Statement ins(impl_->db, "INSERT INTO snapshots (session_id, created_at, payload) VALUES (?1, ?2, ?3)");
    ins.bind(1, session_id).bind(2, to_millis(now)).bind(3, core::to_json(model).dump()).run();
    auto id = sqlite3_last_insert_rowid(impl_->db);
    return {std::to_string(id), from_millis(to_millis(now)), session_id};
}

core::SessionModel SessionStore::restore(const SnapshotHandle& handle) {
    std::lock_guard lock(impl_->mutex);
    impl_->require_writable();
    Statement q(impl_->db, "SELECT session_id, payload FROM snapshots WHERE snapshot_id = ?1");
    std::int64_t id = 0;
    try {
        id = std::stoll(handle.snapshot_id);
    } catch (const std::exception&) {
        throw UnknownSnapshot("unknown snapshot '" + handle.snapshot_id + "'");
    }
    q.bind(1, id);
    if (!q.step()) throw UnknownSnapshot("unknown snapshot '" + handle.snapshot_id + "'");
    std::string session_id = q.text(0);
    core::SessionModel model;
    try {
        model = core::session_from_json(json::parse(q.text(1)));
    } catch (const json::exception& e) {
        throw StorageFailure("corrupt snapshot payload: " + std::string(e.what()));
    } catch (const InvalidModel& e) {
        throw StorageFailure("corrupt snapshot payload: " + std::string(e.what()));
    }
    Transaction tx(impl_->db);
    impl_->write_rows(session_id, model);
    tx.commit();
    return model;
}

void SessionStore::discard(const SnapshotHandle& handle) {
    std::lock_guard lock(impl_->mutex);
    impl_->require_writable();
    Statement del(impl_->db, "DELETE FROM snapshots WHERE snapshot_id = ?1");
    try {
        del.bind(1, static_cast<std::int64_t>(std::stoll(handle.snapshot_id))).run();
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
}

std::vector<SnapshotHandle> SessionStore::snapshots(const std::string& session_id) const {
    std::lock_guard lock(impl_->mutex);
    Statement q(impl_->db, "SELECT snapshot_id, created_at FROM snapshots WHERE session_id = ?1 ORDER BY snapshot_id");
    q.bind(1, session_id);
    std::vector<SnapshotHandle> out;
    while (q.step()) out.push_back({std::to_string(q.integer(0)), from_millis(q.integer(1)), session_id});
    return out;
}

void SessionStore::put_transcript(const std::string& session_id, const std::string& agent_role, int step_index,
                                  const std::string& body) {
    std::lock_guard lock(impl_->mutex);
    impl_->require_writable();
    Statement ins(impl_->db,
                  "INSERT OR REPLACE INTO agent_transcripts (session_id, agent_role, step_index, body) "
                  "VALUES (?1, ?2, ?3, ?4)");
    ins.bind(1, session_id).bind(2, agent_role).bind(3, step_index).bind(4, body).run();
}

std::vector<TranscriptRecord> SessionStore::transcripts(const std::string& session_id) const {
    std::lock_guard lock(impl_->mutex);
    Statement q(impl_->db,
                "SELECT agent_role, step_index, body FROM agent_transcripts WHERE session_id = ?1 "
                "ORDER BY step_index, agent_role");
    q.bind(1, session_id);
    std::vector<TranscriptRecord> out;
    while (q.step()) out.push_back({q.text(0), static_cast<int>(q.integer(1)), q.text(2)});
    return out;
}

void SessionStore::set_write_fault(std::function<void(std::string_view table)> hook) {
    std::lock_guard lock(impl_->mutex);
    impl_->fault = std::move(hook);
}

}  // namespace simforge::store
