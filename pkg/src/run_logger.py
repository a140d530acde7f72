import json
import logging
from datetime import datetime
import os
from pathlib import Path

from config.config import LOG_DIR


class RunLogger:
    def __init__(self, log_dir=LOG_DIR, name="run"):
        """Initialize the run logger"""
        self.log_dir = log_dir
        self.current_run = {
            "timestamp": datetime.now().isoformat(),
            "run_id": f"{name}_{datetime.now().strftime('%Y%m%d_%H%M%S_%f')}",
            "spec": {},
            "events": [],
            "result": None
        }

        # Create logs directory if it doesn't exist
        Path(log_dir).mkdir(parents=True, exist_ok=True)

        self.log_file = os.path.join(log_dir, f"{self.current_run['run_id']}.log")
        self.json_file = os.path.join(log_dir, f"{self.current_run['run_id']}.json")

        self.logger = logging.getLogger(f"run.{self.current_run['run_id']}")
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

        fh = logging.FileHandler(self.log_file)
        fh.setLevel(logging.INFO)
        fh.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
        self.logger.addHandler(fh)
        self._handler = fh

    def log_spec(self, spec):
        """Log what is being solved"""
        self.current_run["spec"] = spec
        self.logger.info(f"Run spec: {json.dumps(spec, sort_keys=True)}")
        self._save_json()

    def log_event(self, step, value, elapsed, metadata=None):
        """Log one solver milestone"""
        event = {
            "step": step,
            "value": value,
            "elapsed": elapsed,
            "metadata": metadata or {}
        }
        self.current_run["events"].append(event)
        self.logger.info(f"{step}: {value:.6f} after {elapsed:.3f}s")
        if metadata:
            self.logger.info(f"Metadata: {json.dumps(metadata)}")

    def log_result(self, result):
        """Log the final result and flush the JSON document"""
        self.current_run["result"] = result
        self.logger.info(f"Result: {json.dumps(result, sort_keys=True)}")
        self._save_json()

    def close(self):
        self.logger.removeHandler(self._handler)
        self._handler.close()

    def _save_json(self):
        with open(self.json_file, 'w') as f:
            json.dump(self.current_run, f, indent=2)

    def get_run_summary(self):
        """Get a human-readable summary of the run"""
        spec = self.current_run["spec"]
        result = self.current_run["result"]
        summary = [
            "=== Run Summary ===",
            f"Date: {self.current_run['timestamp']}",
            "Spec:",
        ]
        summary.extend(f"- {key}: {value}" for key, value in sorted(spec.items()))
        summary.append(f"Events: {len(self.current_run['events'])}")
        for event in self.current_run["events"]:
            summary.append(f"- {event['step']} {event['value']:.6f} at {event['elapsed']:.3f}s")
        if result:
            summary.append("Result:")
            summary.extend(f"- {key}: {value}" for key, value in sorted(result.items()))
        return "\n".join(summary)

    def save_summary(self, filename=None):
        """Save the run summary to a file"""
        if filename is None:
            filename = os.path.join(self.log_dir, f"summary_{self.current_run['run_id']}.txt")
        with open(filename, 'w') as f:
            f.write(self.get_run_summary())
        return filename
