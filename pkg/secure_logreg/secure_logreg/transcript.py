"""
Append-only message transcript of a protocol run

Every message is measured as its canonical JSON line, which is also the
on-disk JSONL format.
"""
import json
import threading
import time
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

MessageType = Literal["submission", "aggregate", "beta_broadcast"]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def center_name(center_id: int) -> str:
    return f"center-{center_id}"


@dataclass(frozen=True)
class Message:
    msg_type: MessageType
    iteration: int
    sender: str
    receiver: str
    body: dict[str, Any]
    timestamp: float
    nbytes: int

    def to_record(self) -> dict[str, Any]:
        return {
            "msg_type": self.msg_type,
            "iteration": self.iteration,
            "sender": self.sender,
            "receiver": self.receiver,
            "body": self.body,
        }


class Transcript:
    """Ordered log of submissions, center exchanges and beta broadcasts"""

    def __init__(self):
        self._messages: list[Message] = []
        self._lock = threading.Lock()

    def append(
        self,
        msg_type: MessageType,
        iteration: int,
        sender: str,
        receiver: str,
        body: dict[str, Any],
    ) -> Message:
        return self._store(msg_type, iteration, sender, receiver, body, time.time())

    def _store(self, msg_type, iteration, sender, receiver, body, timestamp) -> Message:
        record = {
            "msg_type": msg_type,
            "iteration": iteration,
            "sender": sender,
            "receiver": receiver,
            "body": body,
        }
        # +1 for the newline terminating the JSONL record
        nbytes = len(canonical_json(record).encode("utf-8")) + 1
        message = Message(msg_type, iteration, sender, receiver, body, timestamp, nbytes)
        with self._lock:
            self._messages.append(message)
        return message

    @property
    def messages(self) -> tuple[Message, ...]:
        with self._lock:
            return tuple(self._messages)

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self) -> Iterator[Message]:
        return iter(self.messages)

    @property
    def total_bytes(self) -> int:
        return sum(m.nbytes for m in self.messages)

    def bytes_by_type(self) -> dict[str, int]:
        totals: Counter[str] = Counter()
        for m in self.messages:
            totals[m.msg_type] += m.nbytes
        return dict(totals)

    def visible_to(self, receivers: Iterable[str]) -> list[Message]:
        names = set(receivers)
        return [m for m in self.messages if m.receiver in names]

    def write_jsonl(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for m in self.messages:
                f.write(canonical_json({**m.to_record(), "timestamp": m.timestamp}) + "\n")
        return path

    @classmethod
    def read_jsonl(cls, path: str | Path) -> "Transcript":
        transcript = cls()
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                record = json.loads(line)
                transcript._store(
                    record["msg_type"], record["iteration"], record["sender"],
                    record["receiver"], record["body"], record.get("timestamp", 0.0),
                )
        return transcript
