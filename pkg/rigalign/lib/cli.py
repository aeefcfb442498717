import click


def command_name(module_name: str) -> str:
    return module_name.split(".")[-1].replace("_", "-")


def load_command(module) -> tuple[str, click.Command]:
    return command_name(module.__name__), module.main


class CommaSeparated(click.ParamType):
    name = "commaseparated"

    def convert(self, value, param, context):
        if isinstance(value, (list, tuple)):
            return list(value)
        items = [item.strip() for item in value.split(",")]
        if not all(items):
            self.fail(f"{value!r} has an empty item", param, context)
        return items
