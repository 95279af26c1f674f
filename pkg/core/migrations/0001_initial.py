from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="RunRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("command", models.CharField(max_length=50)),
                ("arguments", models.JSONField(default=dict)),
                ("seed", models.BigIntegerField()),
                ("output_format", models.CharField(max_length=10)),
                (
                    "numeric_mode",
                    models.CharField(
                        choices=[("exact", "Exact"), ("float", "Float")],
                        default="float",
                        max_length=10,
                    ),
                ),
                ("succeeded", models.BooleanField(default=True)),
                ("payload", models.JSONField(default=dict)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at", "-id"],
            },
        ),
        migrations.AddIndex(
            model_name="runrecord",
            index=models.Index(
                fields=["command", "-created_at"], name="core_runrec_command_idx"
            ),
        ),
    ]
