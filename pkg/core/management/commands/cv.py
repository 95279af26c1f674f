from core.commands import ReportCommand
from core.output import Report
from cvchain.services import cv_report


class Command(ReportCommand):
    help = "Chained inequality on the packet lattice"
    allow_exact = False

    def add_report_arguments(self, parser):
        parser.add_argument("--n", type=int, default=4, help="Even cycle length")
        parser.add_argument("--M", type=int, required=True, help="Packets per parity class")

    def build_report(self, config, options):
        return Report(cv_report(options["n"], options["M"]))
