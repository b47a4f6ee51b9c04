#include "folio/rag/session.hpp"

#include <cstdio>

#include "folio/error.hpp"

namespace folio::rag {

void ChatSession::append(Turn turn) {
  std::lock_guard lock(mu_);
  const Role expected = turns_.empty() || turns_.back().role == Role::Assistant ? Role::User : Role::Assistant;
  if (turn.role != expected) {
    throw Error(Errc::AlternationViolation,
                "session " + id_ + " expects a " + std::string(to_string(expected)) + " turn next");
  }
  if (turn.role == Role::User && !turn.citations.empty()) {
    throw Error(Errc::AlternationViolation, "user turns cannot carry citations");
  }
  turns_.push_back(std::move(turn));
}

void ChatSession::pop_back() {
  std::lock_guard lock(mu_);
  if (!turns_.empty()) turns_.pop_back();
}

std::vector<Turn> ChatSession::turns() const {
  std::lock_guard lock(mu_);
  return turns_;
}

std::vector<Turn> ChatSession::last(std::size_t n) const {
  std::lock_guard lock(mu_);
  const auto start = turns_.size() > n ? turns_.size() - n : 0;
  return {turns_.begin() + static_cast<std::ptrdiff_t>(start), turns_.end()};
}

std::size_t ChatSession::size() const {
  std::lock_guard lock(mu_);
  return turns_.size();
}

std::shared_ptr<ChatSession> SessionRegistry::create() {
  std::unique_lock lock(mu_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(++counter_));
  auto s = std::make_shared<ChatSession>(buf);
  sessions_.emplace(s->id(), s);
  return s;
}

std::shared_ptr<ChatSession> SessionRegistry::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::SessionNotFound, "no session with id '" + id + "'");
  return it->second;
}

bool SessionRegistry::contains(const std::string& id) const {
  std::shared_lock lock(mu_);
  return sessions_.count(id) != 0;
}

std::size_t SessionRegistry::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

}  // namespace folio::rag
