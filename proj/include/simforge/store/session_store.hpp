#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "simforge/core/model.hpp"

namespace simforge::store {

inline constexpr int kSchemaVersion = 1;

struct SnapshotHandle {
    std::string snapshot_id;
    std::chrono::system_clock::time_point created_at;
    std::string session_id;
};

struct TranscriptRecord {
    std::string agent_role;
    int step_index = 0;
    std::string body;
};

enum class OpenMode { ReadWrite, ReadOnly };

/// SQLite-backed persistence for sessions. Tables: state_variables,
/// functions, queries, metadata, plus agent_transcripts and snapshots.
///
/// Writes are serialized through one connection guarded by a mutex; each
/// save is a single transaction, so a failed save leaves the previously
/// committed session readable.
class SessionStore {
public:
    explicit SessionStore(const std::filesystem::path& path, OpenMode mode = OpenMode::ReadWrite);
    ~SessionStore();

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    void save(const std::string& session_id, const core::SessionModel& model);
    core::SessionModel load(const std::string& session_id) const;
    bool exists(const std::string& session_id) const;
    std::vector<std::string> sessions() const;
    void remove(const std::string& session_id);

    SnapshotHandle snapshot(const std::string& session_id);
    /// Replaces the live session with the snapshot contents and returns them.
    core::SessionModel restore(const SnapshotHandle& handle);
    void discard(const SnapshotHandle& handle);
    std::vector<SnapshotHandle> snapshots(const std::string& session_id) const;

    /// Upserts the transcript for (session, role, step).
    void put_transcript(const std::string& session_id, const std::string& agent_role, int step_index,
                        const std::string& body);
    std::vector<TranscriptRecord> transcripts(const std::string& session_id) const;

    /// Test seam: called with the table name before every row written by
    /// save(); throwing from it aborts the transaction.
    void set_write_fault(std::function<void(std::string_view table)> hook);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace simforge::store
