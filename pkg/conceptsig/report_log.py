"""
Result lines shown to the user by repro and mlp-check
"""
import sys
import textwrap
from typing import Iterable, List, Optional, TextIO


class Report:
    """
    One line of results

    :param text: Line text
    :type text: str
    :param tag: Short status shown in front, e.g. PASS or FAIL, defaults to ""
    :type tag: str, optional
    """
    def __init__(self, text: str, tag: str = ""):
        self.plain_text = text
        self.tag = tag
        self.count = 1

    @property
    def full_text(self) -> str:
        """the full text of this line, including tag and count"""
        text = f"[{self.tag}] {self.plain_text}" if self.tag else self.plain_text
        if self.count > 1:
            return f"{text} (x{self.count})"
        return text


class ReportLog:
    """
    Ordered list of result lines, rendered to a text stream at the end of a run
    """
    def __init__(self) -> None:
        self.reports: List[Report] = []

    def add(self, text: str, tag: str = "", *, stack: bool = True) -> None:
        """Add a line to this log.
        If ´stack´ is True the line can stack with a previous line of the
        same text and tag
        """
        if stack and self.reports and text == self.reports[-1].plain_text and tag == self.reports[-1].tag:
            self.reports[-1].count += 1
        else:
            self.reports.append(Report(text, tag))

    def lines(self, width: int = 100) -> List[str]:
        return [line for report in self.reports for line in self.wrap(report.full_text, width)]

    def render(self, stream: Optional[TextIO] = None, width: int = 100) -> None:
        """write every line to ´stream´ (stdout by default)"""
        stream = stream or sys.stdout
        for line in self.lines(width):
            stream.write(line + "\n")

    @staticmethod
    def wrap(string: str, width: int) -> Iterable[str]:
        """returns a wrapped line"""
        for line in string.splitlines():
            yield from textwrap.wrap(line, width, expand_tabs=True) or [""]
