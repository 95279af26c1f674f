from django.core.management.base import BaseCommand

from core.models import RunRecord


class Command(BaseCommand):
    help = "List or clear stored command runs"

    def add_arguments(self, parser):
        parser.add_argument("--limit", type=int, default=20, help="How many runs to list")
        parser.add_argument("--command", type=str, default=None, help="Only this command")
        parser.add_argument("--clear", action="store_true", help="Delete the stored runs")

    def handle(self, *args, **options):
        records = RunRecord.objects.all()
        if options["command"]:
            records = records.filter(command=options["command"])

        if options["clear"]:
            deleted, _ = records.delete()
            self.stdout.write(self.style.SUCCESS(f"Deleted {deleted} run records"))
            return

        self.stdout.write("=== Stored runs ===")
        for record in records[: options["limit"]]:
            status = "ok" if record.succeeded else "FAILED"
            self.stdout.write(
                f"{record.created_at:%Y-%m-%d %H:%M:%S} {record.command:<8} "
                f"seed={record.seed} mode={record.numeric_mode} {status}"
            )
        self.stdout.write(f"Total: {records.count()}")
