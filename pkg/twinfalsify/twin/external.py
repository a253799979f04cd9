"""External twins driven over the line protocol, one subprocess per worker"""

import logging
import queue
import subprocess
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .protocol import decode_frame, encode_frame
from .session import TwinFactory, TwinSession
from ..errors import ProtocolError, SessionTimeout, TwinError

logger = logging.getLogger(__name__)


class TwinProcess:
    """One external simulator process; exchanges are strictly request/response"""

    def __init__(self, command: Sequence[str], timeout: float, x0_dim: Optional[int] = None,
                 x_dim: Optional[int] = None):
        self.command = list(command)
        self.timeout = timeout
        self.x0_dim = x0_dim
        self.x_dim = x_dim
        self.restarts = 0
        self._start()

    def _start(self):
        self.proc = subprocess.Popen(
            self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
        )
        self._lines: "queue.Queue[Optional[bytes]]" = queue.Queue()
        reader = threading.Thread(target=self._read, args=(self.proc, self._lines), daemon=True)
        reader.start()
        logger.debug(f"Started twin process {self.proc.pid}: {' '.join(self.command)}")

    @staticmethod
    def _read(proc: subprocess.Popen, lines: "queue.Queue[Optional[bytes]]"):
        for line in iter(proc.stdout.readline, b""):
            lines.put(line)
        lines.put(None)

    def exchange(self, frame: Dict[str, Any]) -> Dict[str, Any]:
        """Send one frame, wait for one answer"""
        try:
            self.proc.stdin.write(encode_frame(frame, self.x0_dim))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise TwinError("twin process is not accepting input")
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise SessionTimeout(f"no answer to '{frame['cmd']}' within {self.timeout}s")
        if line is None:
            raise TwinError(f"twin process exited with code {self.proc.poll()}")
        return decode_frame(line, self.x0_dim, self.x_dim)

    def kill(self):
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass

    def restart(self):
        logger.warning(f"Restarting twin process {self.proc.pid}")
        self.kill()
        self.restarts += 1
        self._start()


class SubprocessTwinSession(TwinSession):

    def __init__(self, process: TwinProcess, index: int):
        self.process = process
        self.index = index

    def _call(self, frame: Dict[str, Any], expect: str) -> Dict[str, Any]:
        try:
            answer = self.process.exchange(frame)
        except SessionTimeout as e:
            self.process.restart()
            raise SessionTimeout(str(e), self.index) from e
        except (TwinError, ProtocolError) as e:
            self.process.restart()
            raise TwinError(f"protocol violation: {e}", self.index) from e
        if "error" in answer:
            raise TwinError(f"twin reported: {answer['error']}", self.index)
        if expect not in answer:
            self.process.restart()
            raise TwinError(f"expected '{expect}' in answer to '{frame['cmd']}', got {answer}", self.index)
        return answer

    def init(self, x0: Sequence[float]):
        self._call({"cmd": "init", "x0": [float(v) for v in x0]}, "ok")

    def step(self, action: int, raw: Optional[Sequence[float]] = None) -> List[float]:
        frame: Dict[str, Any] = {"cmd": "step", "a": int(action)}
        if raw is not None:
            frame["raw"] = [float(v) for v in raw]
        return self._call(frame, "x")["x"]

    def reset(self):
        self._call({"cmd": "reset"}, "ok")


class SubprocessTwinFactory(TwinFactory):
    """Pool of P processes; each session borrows one process until released"""

    def __init__(self, command: Sequence[str], workers: int = 1, timeout: float = 30.0,
                 x0_dim: Optional[int] = None, x_dim: Optional[int] = None,
                 consumes_raw_doses: bool = False, twin_id: Optional[str] = None):
        if not command:
            raise TwinError("empty twin command")
        self.command = list(command)
        self.consumes_raw_doses = consumes_raw_doses
        self.twin_id = twin_id or f"external:{Path(self.command[-1]).name}"
        self._processes = [TwinProcess(self.command, timeout, x0_dim, x_dim) for _ in range(workers)]
        self._idle: "queue.Queue[TwinProcess]" = queue.Queue()
        for process in self._processes:
            self._idle.put(process)
        logger.info(f"Started {workers} external twin process(es) for {self.twin_id}")

    def create(self, index: int, seed: int) -> SubprocessTwinSession:
        return SubprocessTwinSession(self._idle.get(), index)

    def release(self, session: SubprocessTwinSession):
        try:
            session.reset()
        except TwinError as e:
            logger.warning(f"Reset after session {session.index} failed: {e}")
        finally:
            self._idle.put(session.process)

    @property
    def restarts(self) -> int:
        return sum(p.restarts for p in self._processes)

    def metadata(self) -> Dict[str, Any]:
        return {"twin_id": self.twin_id, "command": self.command, "restarts": self.restarts}

    def close(self):
        for process in self._processes:
            process.kill()
